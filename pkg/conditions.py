# conditions.py
"""
Coefficient conditions of the construction.

- Coefficient conditions C1..C18, evaluated exactly as printed.
- Construction items (i)-(iv), from eigenvalue signs at xi_a / xi_b.
- Hypotheses (Ha)-(Hd), condition (3) in direct and printed form,
  the delta quantity in product and linear form, and the rho diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

from equilibria import (
    SADDLE,
    SINK,
    NotASaddleInS134,
    PrincipalPlane,
    compute_equilibria,
    l1_roots,
    p12_interior_equilibria,
    principal_plane,
    z_set_slice,
)
from errors import DegenerateCoefficient, NoRealEquilibria, SignPatternViolation
from vector_field import CoefficientSet, SubspaceId, SymmetryElement


# ------------------------------------------------------------
# REPORT TYPES
# ------------------------------------------------------------

@dataclass
class ConditionRow:
    id: str
    lhs: float
    rhs: float
    sense: str                 # "<" or ">"
    passed: Optional[bool]     # None = deferred
    evidence: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"id": self.id, "lhs": self.lhs, "rhs": self.rhs, "sense": self.sense, "pass": self.passed}
        if self.evidence:
            d["evidence"] = self.evidence
        return d


def _compare(lhs: float, rhs: float, sense: str) -> bool:
    if math.isnan(lhs) or math.isnan(rhs):
        return False
    return lhs < rhs if sense == "<" else lhs > rhs


def _row(id_: str, lhs: float, sense: str, rhs: float = 0.0, **evidence) -> ConditionRow:
    return ConditionRow(id=id_, lhs=lhs, rhs=rhs, sense=sense,
                        passed=_compare(lhs, rhs, sense), evidence=evidence)


@dataclass
class ConditionReport:
    discriminant: float
    table1: List[ConditionRow] = field(default_factory=list)
    informational: List[ConditionRow] = field(default_factory=list)
    hypotheses: List[ConditionRow] = field(default_factory=list)
    c_bar_a: Optional[float] = None
    c_bar_a_x3: Optional[float] = None
    c_bar_a_x4: Optional[float] = None
    c_bar_b: Optional[float] = None
    e_bar_a: Optional[float] = None
    e_bar_b: Optional[float] = None
    delta_linear: Optional[float] = None
    delta_product: Optional[float] = None
    rho3: Optional[float] = None
    rho4: Optional[float] = None
    skipped: Optional[str] = None

    def row(self, id_: str) -> ConditionRow:
        for r in self.table1 + self.informational + self.hypotheses:
            if r.id == id_:
                return r
        raise KeyError(id_)

    def table1_passed(self) -> bool:
        return bool(self.table1) and all(r.passed for r in self.table1)

    def failed_rows(self) -> List[str]:
        return [r.id for r in self.table1 if not r.passed]

    @property
    def condition3_direct(self) -> Optional[ConditionRow]:
        return self._maybe("H3_direct")

    @property
    def condition3_printed_branch3(self) -> Optional[ConditionRow]:
        return self._maybe("H3_printed_3")

    @property
    def condition3_printed_branch4(self) -> Optional[ConditionRow]:
        return self._maybe("H3_printed_4")

    def _maybe(self, id_: str) -> Optional[ConditionRow]:
        try:
            return self.row(id_)
        except KeyError:
            return None

    def to_dict(self) -> dict:
        return {
            "discriminant": self.discriminant,
            "table1_pass": self.table1_passed() if self.table1 else None,
            "conditions": [r.to_dict() for r in self.table1],
            "informational": [r.to_dict() for r in self.informational],
            "hypotheses": [r.to_dict() for r in self.hypotheses],
            "stability_quantities": {
                "c_bar_a": self.c_bar_a,
                "c_bar_a_x3": self.c_bar_a_x3,
                "c_bar_a_x4": self.c_bar_a_x4,
                "c_bar_b": self.c_bar_b,
                "e_bar_a": self.e_bar_a,
                "e_bar_b": self.e_bar_b,
                "delta_linear": self.delta_linear,
                "delta_product": self.delta_product,
                "rho3": self.rho3,
                "rho4": self.rho4,
            },
            "skipped": self.skipped,
        }


# ------------------------------------------------------------
# TABLE 1
# ------------------------------------------------------------

def _ratio_term(d: float, b: float, c: CoefficientSet) -> float:
    """d - (b / c1) b11, or NaN when c1 = 0."""
    if c.c1 == 0.0:
        return float("nan")
    return d - (b / c.c1) * c.b11


def check_table1(coeffs: CoefficientSet) -> ConditionReport:
    """
    The eighteen printed inequalities. C11-C13 are sign conditions only;
    whether they are "large" enough is settled by the eigenvalue signs
    in check_construction.
    """
    c = coeffs
    rows = [
        _row("C1", c.b13, "<"),
        _row("C2", c.b14, "<"),
        _row("C3", c.b12, ">"),
        _row("C4", c.b22, "<"),
        _row("C5", c.b33, "<"),
        _row("C6", c.b44, "<"),
        _row("C7", c.c3, "<"),
        _row("C8", c.c4, "<"),
        _row("C9", c.c1, "<"),
        _row("C10", c.b21, ">"),
        _row("C11", _ratio_term(c.d2, c.b21, c), "<"),
        _row("C12", _ratio_term(c.d3, c.b31, c), ">"),
        _row("C13", _ratio_term(c.d4, c.b41, c), ">"),
        _row("C14", c.d4 - c.d3, ">"),
        _row("C15", c.b41 - c.b31, ">"),
        _row("C16", c.d3 * c.b41 - c.d4 * c.b31, "<"),
        _row("C17",
             (c.c1 - c.b31) * (c.d2 * c.c1 - c.b21 * c.b11), "<",
             (c.c1 - c.b21) * (c.d3 * c.c1 - c.b31 * c.b11)),
        _row("C18", c.b11, ">"),
    ]

    c13_minus_c12 = (c.d4 - c.d3 - (c.b11 / c.c1) * (c.b41 - c.b31)) if c.c1 != 0.0 else float("nan")
    informational = [
        _row("C13_minus_C12", c13_minus_c12, ">"),
        ConditionRow(
            id="C17_sufficient",
            lhs=max(c.c1 - c.b31, c.c1 - c.b21),
            rhs=0.0,
            sense="<",
            passed=(c.c1 - c.b31 < 0.0) and (c.c1 - c.b21 < 0.0),
            evidence={"c1_minus_b31": c.c1 - c.b31, "c1_minus_b21": c.c1 - c.b21},
        ),
    ]
    return ConditionReport(discriminant=c.discriminant, table1=rows, informational=informational)


# ------------------------------------------------------------
# CONSTRUCTION ITEMS (i)-(iv)
# ------------------------------------------------------------

@dataclass
class ConstructionItem:
    item: str
    passed: bool
    evidence: Dict[str, Any] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"item": self.item, "pass": self.passed, "evidence": self.evidence, "flags": list(self.flags)}


@dataclass
class ConstructionReport:
    items: List[ConstructionItem]
    principal_plane: Optional[str] = None

    def item(self, name: str) -> ConstructionItem:
        for it in self.items:
            if it.item == name:
                return it
        raise KeyError(name)

    def sign_patterns_hold(self) -> bool:
        """Items (i)-(iii) only, without the P12 interior scan."""
        try:
            return (self.item("i").passed
                    and self.item("ii").evidence.get("sign_pattern", False)
                    and self.item("iii").passed)
        except KeyError:
            return False

    def to_dict(self) -> dict:
        return {"items": [it.to_dict() for it in self.items], "principal_plane": self.principal_plane}


def check_construction(coeffs: CoefficientSet) -> ConstructionReport:
    c = coeffs
    items: List[ConstructionItem] = []

    # (i) sign pattern of the L1 roots
    try:
        roots = l1_roots(c)
    except (NoRealEquilibria, DegenerateCoefficient) as e:
        items.append(ConstructionItem("i", False, {"error": type(e).__name__, "message": str(e)}))
        for name in ("ii", "iii", "iv"):
            items.append(ConstructionItem(name, False, {}, ["skipped: no real equilibria on L1"]))
        return ConstructionReport(items=items)

    xa_val, xb_val = roots
    item_i = ConstructionItem("i", xa_val < 0.0 < xb_val, {"x_a": xa_val, "x_b": xb_val})
    items.append(item_i)
    if not item_i.passed:
        item_i.flags.append("roots have the same sign")
        for name in ("ii", "iii", "iv"):
            items.append(ConstructionItem(name, False, {}, ["skipped: item (i) failed"]))
        return ConstructionReport(items=items)

    xa, xb = compute_equilibria(c)

    # (ii) P12: xi_a saddle, xi_b sink, no equilibria inside D
    role_a = xa.role_in(SubspaceId.P12)
    role_b = xb.role_in(SubspaceId.P12)
    sign_ok = role_a == SADDLE and xa.eigenvalues[1] > 0.0 and role_b == SINK
    ev_ii: Dict[str, Any] = {
        "xi_a_role_P12": role_a,
        "xi_b_role_P12": role_b,
        "sign_pattern": sign_ok,
    }
    flags_ii: List[str] = []
    interior_ok = False
    try:
        sols = p12_interior_equilibria(c)
        ev_ii["p12_equilibria"] = [s.to_dict() for s in sols]
        interior_ok = not any(s.inside_D for s in sols)
    except DegenerateCoefficient as e:
        flags_ii.append(f"P12 interior scan unavailable: {e}")
    if c.b12 <= 0.0:
        flags_ii.append(
            "b12 <= 0: x1' > 0 monotonicity argument unavailable; "
            "connection existence deferred to experiments"
        )
    ev_ii["no_equilibria_in_D"] = interior_ok
    items.append(ConstructionItem("ii", sign_ok and interior_ok, ev_ii, flags_ii))

    # (iii) S134: xi_a sink, xi_b saddle with both transverse directions expanding
    role_a = xa.role_in(SubspaceId.S134)
    role_b = xb.role_in(SubspaceId.S134)
    lam1_b, _, lam3_b, lam4_b = xb.eigenvalues
    ok_iii = role_a == SINK and lam1_b < 0.0 and lam3_b > 0.0 and lam4_b > 0.0
    mid = 0.5 * (xa.x1_value + xb.x1_value)
    ellipse = z_set_slice(c, mid)
    flags_iii = []
    if c.b13 >= 0.0 or c.b14 >= 0.0:
        flags_iii.append("b13 or b14 >= 0: Z-set confinement argument unavailable")
    items.append(ConstructionItem("iii", ok_iii, {
        "xi_a_role_S134": role_a,
        "xi_b_role_S134": role_b,
        "z_set_slice_x1": mid,
        "z_set_semi_axes": list(ellipse) if ellipse else None,
    }, flags_iii))

    # (iv) principal connection C_ba^p lies in P13
    ev_iv: Dict[str, Any] = {"lambda3_xi_b": lam3_b, "lambda4_xi_b": lam4_b}
    flags_iv: List[str] = []
    plane_name = None
    try:
        plane = principal_plane(c)
        plane_name = plane.value
    except NotASaddleInS134 as e:
        flags_iv.append(f"principal plane undetermined: {e}")
    ev_iv["principal_plane"] = plane_name

    if c.b31 != c.b41:
        threshold = (c.d4 - c.d3) / (c.b31 - c.b41)
        printed_holds = xb.x1_value > threshold
        ev_iv["printed_threshold"] = threshold
        ev_iv["printed_inequality_holds"] = printed_holds
        ev_iv["printed_agrees_with_direct"] = printed_holds == (lam3_b > lam4_b)
    else:
        ev_iv["printed_threshold"] = None

    if plane_name is not None and plane_name != PrincipalPlane.P13.value:
        flags_iv.append(f"principal plane is {plane_name}; construction asserts C_ba^p in P13")
    items.append(ConstructionItem("iv", plane_name == PrincipalPlane.P13.value, ev_iv, flags_iv))

    return ConstructionReport(items=items, principal_plane=plane_name)


# ------------------------------------------------------------
# HYPOTHESES
# ------------------------------------------------------------

def isotropy_of(sid: SubspaceId) -> List[SymmetryElement]:
    """Group elements fixing every point of a coordinate subspace."""
    out = []
    for g in SymmetryElement:
        flipped = [i for i, s in enumerate(g.value) if s < 0.0]
        if all(i in sid.vanishing for i in flipped):
            out.append(g)
    return out


def fixed_coordinates(group: Sequence[SymmetryElement]) -> tuple:
    return tuple(i for i in range(4) if all(g.value[i] > 0.0 for g in group))


def isotypic_components() -> List[tuple]:
    """Coordinates grouped by their character under the generators."""
    chars: Dict[tuple, List[int]] = {}
    for i in range(4):
        key = (SymmetryElement.Kappa2.value[i], SymmetryElement.Kappa34.value[i])
        chars.setdefault(key, []).append(i)
    return [tuple(v) for v in chars.values()]


def _within_one_component(indices: Iterable[int]) -> bool:
    idx = set(indices)
    return any(idx <= set(comp) for comp in isotypic_components())


# C_ab lives in P12, the C_ba continuum in S134
CONNECTION_CARRIERS = {"C_ab": SubspaceId.P12, "C_ba": SubspaceId.S134}
# coordinates spanning the eigenspaces tangent to each connection at xi_a / xi_b
TANGENT_COORDINATES = {"C_ab": (1,), "C_ba": (2, 3)}


def _branch_row(id_: str, c: CoefficientSet, k: int) -> ConditionRow:
    bk1 = getattr(c, f"b{k}1")
    dk = getattr(c, f"d{k}")
    lhs = (c.c1 - bk1) * (c.d2 * c.c1 - c.b21 * c.b11)
    rhs = (c.c1 - c.b21) * (dk * c.c1 - bk1 * c.b11)
    return _row(id_, lhs, "<", rhs)


def check_hypotheses(
    coeffs: CoefficientSet,
    connections: Optional[Sequence[Any]] = None,
    report: Optional[ConditionReport] = None,
) -> ConditionReport:
    """
    Fills the H-section of a report. `connections` are ConnectionRecords
    from the shooting experiments; without them (Hc) stays deferred.
    """
    c = coeffs
    xa, xb = compute_equilibria(c)
    if report is None:
        report = ConditionReport(discriminant=c.discriminant)
    rows: List[ConditionRow] = []

    # (Ha) isotropy of each connection, read off the subspace lattice
    iso = {name: isotropy_of(sid) for name, sid in CONNECTION_CARRIERS.items()}
    ha_ok = all(
        len(group) > 1 and fixed_coordinates(group) == CONNECTION_CARRIERS[name].free
        for name, group in iso.items()
    )
    rows.append(ConditionRow("Ha", float("nan"), float("nan"), "=", ha_ok, {
        "isotropy": {name: [g.name for g in group] for name, group in iso.items()},
    }))

    # (Hb) target equilibrium is a sink inside Fix(isotropy)
    hb_ab = xb.role_in(SubspaceId.P12) == SINK
    hb_ba = xa.role_in(SubspaceId.S134) == SINK
    rows.append(ConditionRow("Hb", float("nan"), float("nan"), "=", hb_ab and hb_ba, {
        "xi_b_sink_in_P12": hb_ab,
        "xi_a_sink_in_S134": hb_ba,
    }))

    # (Hc) unstable manifolds are contained in the cycle
    sign_ok = (xa.eigenvalues[1] > 0.0 and xa.role_in(SubspaceId.S134) == SINK
               and xb.role_in(SubspaceId.P12) == SINK
               and xb.eigenvalues[2] > 0.0 and xb.eigenvalues[3] > 0.0)
    unstable_dims = {"xi_a": len(xa.expanding()), "xi_b": len(xb.expanding())}
    if connections is None:
        hc = None
        hc_status = "deferred"
    else:
        verified = [bool(getattr(r, "verified", False)) for r in connections]
        hc = sign_ok and len(verified) >= 3 and all(verified)
        hc_status = "checked"
    rows.append(ConditionRow("Hc", float("nan"), float("nan"), "=", hc, {
        "status": hc_status,
        "sign_patterns": sign_ok,
        "unstable_dimensions": unstable_dims,
    }))

    # (Hd) tangent eigenspaces sit in a single isotypic component
    hd = all(_within_one_component(TANGENT_COORDINATES[n]) for n in TANGENT_COORDINATES)
    rows.append(ConditionRow("Hd", float("nan"), float("nan"), "=", hd, {
        "isotypic_components": [list(comp) for comp in isotypic_components()],
        "tangent_coordinates": {n: list(v) for n, v in TANGENT_COORDINATES.items()},
    }))

    # (3) direct: weakest contraction over all contracting directions
    contr_a, contr_b = xa.contracting(), xb.contracting()
    exp_a, exp_b = xa.expanding(), xb.expanding()
    c_bar_a = min(abs(v) for v in contr_a) if contr_a else float("nan")
    c_bar_b = min(abs(v) for v in contr_b) if contr_b else float("nan")
    e_bar_a = max(exp_a) if exp_a else float("nan")
    e_bar_b = max(exp_b) if exp_b else float("nan")
    rows.append(_row("H3_direct", c_bar_a * c_bar_b, ">", e_bar_a * e_bar_b,
                     c_bar_a=c_bar_a, c_bar_b=c_bar_b, e_bar_a=e_bar_a, e_bar_b=e_bar_b))

    # (3) printed, with c_bar_a taken along x3 and along x4
    rows.append(_branch_row("H3_printed_3", c, 3))
    rows.append(_branch_row("H3_printed_4", c, 4))

    # delta, product and linear forms
    x_a, x_b = xa.x1_value, xb.x1_value
    lam3_a, lam4_a = xa.eigenvalues[2], xa.eigenvalues[3]
    lam3_b, lam4_b = xb.eigenvalues[2], xb.eigenvalues[3]
    delta_product = lam3_a * lam4_b - lam3_b * lam4_a
    delta_linear = (c.d4 - c.d3 + (c.b41 - c.b31) * (x_a + x_b)
                    + (c.d3 * c.b41 - c.d4 * c.b31) * x_a * x_b)
    rows.append(_row("delta_linear", delta_linear, ">"))
    rows.append(_row("delta_product", delta_product, ">", 0.0,
                     identity_factor=x_b - x_a))

    # rho diagnostics: contraction/expansion ratios around each subcycle
    lam2_a, lam2_b = xa.eigenvalues[1], xb.eigenvalues[1]

    def _rho(lam_k_a, lam_k_b):
        if lam2_a == 0.0 or lam_k_b == 0.0:
            return float("nan")
        return (abs(lam_k_a) / lam2_a) * (abs(lam2_b) / lam_k_b)

    rho3, rho4 = _rho(lam3_a, lam3_b), _rho(lam4_a, lam4_b)
    rows.append(_row("rho3", rho3, ">", 1.0, interpretation="cycle-local contraction/expansion product"))
    rows.append(_row("rho4", rho4, ">", 1.0, interpretation="cycle-local contraction/expansion product"))

    report.hypotheses = rows
    report.c_bar_a = c_bar_a
    # branch values used by the printed form of (3)
    report.c_bar_a_x3 = abs(lam3_a)
    report.c_bar_a_x4 = abs(lam4_a)
    report.c_bar_b = c_bar_b
    report.e_bar_a = e_bar_a
    report.e_bar_b = e_bar_b
    report.delta_linear = delta_linear
    report.delta_product = delta_product
    report.rho3 = rho3
    report.rho4 = rho4
    return report


def full_report(coeffs: CoefficientSet, connections: Optional[Sequence[Any]] = None) -> ConditionReport:
    """Conditions C1..C18 plus the H-section; the H-section is skipped when equilibria are unavailable."""
    report = check_table1(coeffs)
    try:
        check_hypotheses(coeffs, connections=connections, report=report)
    except (NoRealEquilibria, SignPatternViolation, DegenerateCoefficient) as e:
        report.skipped = f"{type(e).__name__}: {e}"
    return report
