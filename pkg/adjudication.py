# adjudication.py
"""
End-to-end adjudication for one coefficient set.

Order of work:
  1. Coefficient conditions C1-C18, construction items (i)-(iv)
  2. connections by shooting, unstable fan of xi_b
  3. hypotheses (Hc uses the connections), principal plane, delta
  4. basin fractions of both cycles at the two smallest budgeted eps
  5. optional stability-index ladders on the two C_ba branches

Each stage that cannot run is listed in `skipped` with the reason; the
report is always produced.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from basin import P13_CYCLE, P14_CYCLE, BasinReport, basin_fraction
from classification import ClassifierConfig
from conditions import (
    ConditionReport,
    ConstructionReport,
    check_construction,
    check_hypotheses,
    check_table1,
)
from config import BASIN_EPS_LEVELS, BASIN_SAMPLES, CONNECTION_MAX_TIME
from connections import ConnectionRecord, FanReport, standard_connections, verify_unstable_fan
from equilibria import PrincipalPlane
from errors import ConfigError, HetlabError
from stability_index import (
    EXPECTED_VERDICTS,
    IndexEstimate,
    point_on_connection,
    stability_index_estimate,
)
from vector_field import CoefficientSet, SubspaceId

logger = logging.getLogger(__name__)

BOTH = "Both"
NEITHER = "Neither"
SKIPPED = "skipped"

# a cycle counts as attracting unless its upper confidence bound is below this
ATTRACTION_FLOOR = 0.01


@dataclass(frozen=True)
class BudgetConfig:
    eps_levels: Tuple[float, ...] = BASIN_EPS_LEVELS
    samples: int = BASIN_SAMPLES
    seed: int = 0
    skip_basin: bool = False
    workers: Optional[int] = None
    fan_angles: int = 9
    index_samples: int = 0               # 0 disables the index ladders
    index_ladder: Optional[Tuple[float, ...]] = None
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __post_init__(self):
        if not self.eps_levels or any(e <= 0.0 for e in self.eps_levels):
            raise ConfigError("eps levels must be positive")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.index_samples < 0:
            raise ConfigError("index_samples must be >= 0")
        if self.fan_angles < 1:
            raise ConfigError("fan_angles must be >= 1")

    def basin_levels(self) -> List[float]:
        """The two smallest eps, larger first."""
        return sorted(set(self.eps_levels), reverse=True)[-2:]

    def to_dict(self) -> dict:
        return {
            "eps_levels": list(self.eps_levels),
            "basin_levels": self.basin_levels(),
            "samples": self.samples,
            "seed": self.seed,
            "skip_basin": self.skip_basin,
            "fan_angles": self.fan_angles,
            "index_samples": self.index_samples,
            "index_ladder": list(self.index_ladder) if self.index_ladder else None,
            "classifier": self.classifier.to_dict(),
        }


@dataclass
class AdjudicationReport:
    coefficients: Dict[str, float]
    budget: Dict[str, Any]
    conditions: ConditionReport
    construction: ConstructionReport
    principal_plane: Optional[str] = None
    delta_sign: Optional[int] = None
    predicted_cycle: Optional[str] = None
    simulated_cycle: str = SKIPPED
    connections: List[ConnectionRecord] = field(default_factory=list)
    fan: Optional[FanReport] = None
    basin: List[BasinReport] = field(default_factory=list)
    index_estimates: List[IndexEstimate] = field(default_factory=list)
    flags: Dict[str, Any] = field(default_factory=dict)
    anomalies: List[str] = field(default_factory=list)
    skipped: Dict[str, str] = field(default_factory=dict)

    def basin_reports(self, cycle_id: str) -> List[BasinReport]:
        return sorted((b for b in self.basin if b.cycle_id == cycle_id), key=lambda b: -b.eps)

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients,
            "budget": self.budget,
            "principal_plane": self.principal_plane,
            "delta_sign": self.delta_sign,
            "predicted_cycle": self.predicted_cycle,
            "simulated_cycle": self.simulated_cycle,
            "flags": self.flags,
            "anomalies": list(self.anomalies),
            "skipped": dict(self.skipped),
            "conditions": self.conditions.to_dict(),
            "construction": self.construction.to_dict(),
            "connections": [c.to_dict() for c in self.connections],
            "unstable_fan": self.fan.to_dict() if self.fan else None,
            "basin": [b.to_dict() for b in self.basin],
            "index_estimates": [e.to_dict() for e in self.index_estimates],
            "expected_index_verdicts": {k: [v.value for v in vs] for k, vs in EXPECTED_VERDICTS.items()},
        }


# ------------------------------------------------------------
# VERDICT HELPERS
# ------------------------------------------------------------

def predicted_from_delta(delta: Optional[float]) -> Optional[str]:
    """delta > 0 predicts the P14 cycle, delta < 0 the P13 cycle."""
    if delta is None or delta == 0.0:
        return None
    return P14_CYCLE if delta > 0.0 else P13_CYCLE


def principal_cycle(plane: Optional[str]) -> Optional[str]:
    return {PrincipalPlane.P13.value: P13_CYCLE, PrincipalPlane.P14.value: P14_CYCLE}.get(plane)


def simulated_attractor(reports: Dict[str, BasinReport]) -> str:
    attracts = {cid: rep.attracted_own.upper >= ATTRACTION_FLOOR for cid, rep in reports.items()}
    if attracts.get(P13_CYCLE) and attracts.get(P14_CYCLE):
        return BOTH
    if attracts.get(P13_CYCLE):
        return P13_CYCLE
    if attracts.get(P14_CYCLE):
        return P14_CYCLE
    return NEITHER


def monotone_refinement(coarse: BasinReport, fine: BasinReport) -> bool:
    """Finer tube keeps at least the coarse fraction minus twice the combined CI half-widths."""
    a, b = coarse.attracted_own, fine.attracted_own
    return b.fraction >= a.fraction - 2.0 * (a.half_width + b.half_width)


# ------------------------------------------------------------
# PIPELINE
# ------------------------------------------------------------

def _skip_downstream(report: AdjudicationReport, reason: str, stages: Sequence[str]) -> None:
    for s in stages:
        report.skipped.setdefault(s, reason)


DOWNSTREAM = ("connections", "unstable_fan", "hypotheses", "principal_plane", "basin", "index_estimates")


def adjudicate(coeffs: CoefficientSet, budget: Optional[BudgetConfig] = None) -> AdjudicationReport:
    budget = budget or BudgetConfig()
    logger.info("[Adjudicate] start (seed=%d, samples=%d, skip_basin=%s)",
                budget.seed, budget.samples, budget.skip_basin)

    conditions = check_table1(coeffs)
    construction = check_construction(coeffs)
    report = AdjudicationReport(
        coefficients=coeffs.to_dict(),
        budget=budget.to_dict(),
        conditions=conditions,
        construction=construction,
    )

    if not construction.item("i").passed:
        reason = "construction item (i) failed"
        conditions.skipped = reason
        _skip_downstream(report, reason, DOWNSTREAM)
        report.anomalies.append("construction item (i) fails: equilibria xi_a < 0 < xi_b unavailable")
        logger.warning("[Adjudicate] %s; downstream sections skipped", reason)
        return report

    cfg = budget.classifier

    # ---------- connections ----------
    try:
        report.connections = standard_connections(coeffs, cfg.integrator.with_changes(
            max_time=max(cfg.integrator.max_time, CONNECTION_MAX_TIME)))
    except HetlabError as e:
        report.skipped["connections"] = f"{type(e).__name__}: {e}"
    try:
        report.fan = verify_unstable_fan(coeffs, n_angles=budget.fan_angles)
    except HetlabError as e:
        report.skipped["unstable_fan"] = f"{type(e).__name__}: {e}"

    # ---------- hypotheses / plane / delta ----------
    try:
        check_hypotheses(coeffs, connections=report.connections or None, report=conditions)
    except HetlabError as e:
        report.skipped["hypotheses"] = f"{type(e).__name__}: {e}"

    report.principal_plane = construction.principal_plane
    if report.principal_plane is None:
        report.skipped["principal_plane"] = "; ".join(construction.item("iv").flags) or "undetermined"

    delta = conditions.delta_linear
    if delta is not None:
        report.delta_sign = (delta > 0.0) - (delta < 0.0)
    report.predicted_cycle = predicted_from_delta(delta)

    # ---------- printed vs direct (3) ----------
    printed = conditions.row("C17").passed
    direct = conditions.condition3_direct.passed if conditions.condition3_direct else None
    report.flags["printed_C17_pass"] = printed
    report.flags["direct_condition3_pass"] = direct
    report.flags["printed_vs_direct_agree"] = None if direct is None else printed == direct
    if direct is not None and printed != direct:
        report.anomalies.append(
            f"(a) printed C17 {'passes' if printed else 'fails'} while direct condition (3) "
            f"{'passes' if direct else 'fails'} "
            f"(c_bar product {conditions.condition3_direct.lhs:.6g} vs e_bar product {conditions.condition3_direct.rhs:.6g})"
        )

    if report.principal_plane is not None and report.principal_plane != PrincipalPlane.P13.value:
        report.anomalies.append(
            f"(b) principal plane is {report.principal_plane}, not P13 as the construction asserts"
        )

    # ---------- basin ----------
    if budget.skip_basin:
        report.skipped["basin"] = "skipped by request"
        report.skipped.setdefault("index_estimates", "skipped by request")
    else:
        _run_basin(coeffs, budget, report)

    if budget.index_samples > 0 and "index_estimates" not in report.skipped:
        _run_index(coeffs, budget, report)
    elif "index_estimates" not in report.skipped:
        report.skipped["index_estimates"] = "not budgeted"

    logger.info("[Adjudicate] done: plane=%s predicted=%s simulated=%s anomalies=%d",
                report.principal_plane, report.predicted_cycle, report.simulated_cycle, len(report.anomalies))
    return report


def _run_basin(coeffs: CoefficientSet, budget: BudgetConfig, report: AdjudicationReport) -> None:
    verified = {c.carrier: c.verified for c in report.connections}
    if not verified.get(SubspaceId.P12):
        report.skipped["basin"] = "C_ab not verified"
        return

    levels = budget.basin_levels()
    for cycle_id, plane in ((P13_CYCLE, SubspaceId.P13), (P14_CYCLE, SubspaceId.P14)):
        if not verified.get(plane):
            report.skipped[f"basin_{cycle_id}"] = f"C_ba in {plane.name} not verified"
            continue
        for eps in levels:
            report.basin.append(basin_fraction(
                coeffs, cycle_id, eps, budget.samples, seed=budget.seed,
                cfg=budget.classifier, connections=report.connections, workers=budget.workers,
            ))

    smallest = {b.cycle_id: b for b in report.basin if b.eps == levels[-1]}
    if len(smallest) < 2:
        report.skipped.setdefault("simulated_cycle", "basin fractions missing for a cycle")
        return

    report.simulated_cycle = simulated_attractor(smallest)
    principal = principal_cycle(report.principal_plane)
    report.flags["prediction_matches_simulation"] = (
        None if report.predicted_cycle is None else report.simulated_cycle == report.predicted_cycle
    )
    report.flags["simulated_attractor_is_principal"] = (
        None if principal is None else report.simulated_cycle in (principal, BOTH)
    )

    refinement = {}
    for cycle_id in (P13_CYCLE, P14_CYCLE):
        reps = report.basin_reports(cycle_id)
        attracting = report.simulated_cycle in (cycle_id, BOTH)
        refinement[cycle_id] = monotone_refinement(reps[0], reps[-1]) if attracting and len(reps) > 1 else None
    report.flags["monotone_refinement"] = refinement

    if report.flags["simulated_attractor_is_principal"]:
        report.anomalies.append(f"(c) the simulated attracting cycle includes the principal cycle {principal}")
    if report.simulated_cycle == NEITHER:
        report.anomalies.append(
            "(d) neither cycle attracts: both upper confidence bounds are below "
            f"{ATTRACTION_FLOOR:.0%} at eps={levels[-1]:g}"
        )


def _run_index(coeffs: CoefficientSet, budget: BudgetConfig, report: AdjudicationReport) -> None:
    for rec in report.connections:
        if rec.carrier not in (SubspaceId.P13, SubspaceId.P14) or not rec.verified:
            continue
        try:
            report.index_estimates.append(stability_index_estimate(
                coeffs, point_on_connection(rec), ladder=budget.index_ladder,
                n_per_level=budget.index_samples, seed=budget.seed, connection=rec,
                cfg=budget.classifier, workers=budget.workers,
            ))
        except HetlabError as e:
            report.skipped[f"index_{rec.name}"] = f"{type(e).__name__}: {e}"

    principal = principal_cycle(report.principal_plane)
    for est in report.index_estimates:
        role = "principal" if est.cycle_id == principal else "non_principal"
        expected = EXPECTED_VERDICTS[role]
        report.flags.setdefault("index_matches_expectation", {})[est.connection] = est.verdict in expected
