# coefficient_search.py
"""
Random search for coefficient sets inside a box, and the openness probe.

- Sample i uses its own generator Philox(key = seed ^ i), so the accepted
  set does not depend on how many workers ran the search.
- Samples are evaluated in index-ordered batches; the lowest accepted
  index wins.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from coefficient_config import COEFFICIENT_KEYS, DEFAULT_SEARCH_BOX
from conditions import check_table1
from config import worker_count
from equilibria import SADDLE, SINK, compute_equilibria
from errors import ConfigError, NoRealEquilibria, PreconditionViolated, SignPatternViolation, DegenerateCoefficient
from vector_field import CoefficientSet, SubspaceId

logger = logging.getLogger(__name__)

TABLE1_LITERAL = "table1_literal"
DIRECT_CONDITIONS = "direct_conditions"
SEARCH_MODES = (TABLE1_LITERAL, DIRECT_CONDITIONS)

SEED_MASK = (1 << 64) - 1


# ------------------------------------------------------------
# CONFIG / RESULT TYPES
# ------------------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    mode: str = TABLE1_LITERAL
    box: Dict[str, Tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_SEARCH_BOX))
    max_samples: int = 100_000
    rng_seed: int = 0
    workers: Optional[int] = None
    batch_size: int = 256

    def __post_init__(self):
        if self.mode not in SEARCH_MODES:
            raise ConfigError(f"unknown search mode {self.mode!r}; expected one of {SEARCH_MODES}")
        if int(self.max_samples) < 1:
            raise ConfigError("max_samples must be >= 1")
        if int(self.batch_size) < 1:
            raise ConfigError("batch_size must be >= 1")
        if not 0 <= int(self.rng_seed) <= SEED_MASK:
            raise ConfigError("rng_seed must be a 64-bit unsigned integer")
        for k in COEFFICIENT_KEYS:
            if k not in self.box:
                raise ConfigError(f"search box has no entry for {k!r}")
            lo, hi = self.box[k]
            if lo > hi:
                raise ConfigError(f"search box entry {k!r} has lower > upper")

    def resolved_workers(self) -> int:
        return self.workers if self.workers else worker_count()

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "box": {k: list(self.box[k]) for k in COEFFICIENT_KEYS},
            "max_samples": int(self.max_samples),
            "rng_seed": int(self.rng_seed),
        }


@dataclass
class SearchFailure:
    mode: str
    samples: int
    rng_seed: int
    histogram: Dict[str, int]

    def dominant(self) -> Optional[str]:
        if not self.histogram:
            return None
        return max(sorted(self.histogram), key=lambda k: self.histogram[k])

    def to_dict(self) -> dict:
        return {
            "status": "SearchFailure",
            "mode": self.mode,
            "samples": self.samples,
            "rng_seed": self.rng_seed,
            "failure_histogram": dict(sorted(self.histogram.items())),
            "dominant": self.dominant(),
        }


# ------------------------------------------------------------
# PER-SAMPLE CHECKS
# ------------------------------------------------------------

def sample_generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(int(seed) ^ int(index)) & SEED_MASK))


def draw_from_box(box: Dict[str, Tuple[float, float]], rng: np.random.Generator) -> CoefficientSet:
    lows = np.array([box[k][0] for k in COEFFICIENT_KEYS], dtype=float)
    highs = np.array([box[k][1] for k in COEFFICIENT_KEYS], dtype=float)
    return CoefficientSet.from_vector(rng.uniform(lows, highs))


def _equilibria_or_failure(coeffs: CoefficientSet):
    try:
        return compute_equilibria(coeffs), None
    except (NoRealEquilibria, DegenerateCoefficient, SignPatternViolation):
        return None, "item_i"


def sign_pattern_failures(coeffs: CoefficientSet) -> List[str]:
    """Construction items (i)-(iii) by eigenvalue signs alone."""
    eq, failure = _equilibria_or_failure(coeffs)
    if failure:
        return [failure]
    xa, xb = eq
    failed = []
    if not (xa.role_in(SubspaceId.P12) == SADDLE and xa.eigenvalues[1] > 0.0
            and xb.role_in(SubspaceId.P12) == SINK):
        failed.append("item_ii")
    if not (xa.role_in(SubspaceId.S134) == SINK and xb.eigenvalues[0] < 0.0
            and xb.eigenvalues[2] > 0.0 and xb.eigenvalues[3] > 0.0):
        failed.append("item_iii")
    return failed


def direct_failures(coeffs: CoefficientSet) -> List[str]:
    # c1 >= 0 makes x_a x_b = 1/c1 non-negative, so nothing downstream can hold
    if coeffs.c1 >= 0.0:
        return ["C9"]
    failed = sign_pattern_failures(coeffs)
    if "item_i" in failed:
        return failed

    xa, xb = compute_equilibria(coeffs)
    if not (xb.eigenvalues[2] > 0.0 and xb.eigenvalues[3] > 0.0):
        failed.append("lambda34_xi_b")

    contr_a, contr_b = xa.contracting(), xb.contracting()
    exp_a, exp_b = xa.expanding(), xb.expanding()
    if not (contr_a and contr_b and exp_a and exp_b):
        failed.append("H3_direct")
    else:
        c_bar = min(abs(v) for v in contr_a) * min(abs(v) for v in contr_b)
        e_bar = max(exp_a) * max(exp_b)
        if not c_bar > e_bar:
            failed.append("H3_direct")

    delta_product = (xa.eigenvalues[2] * xb.eigenvalues[3] - xb.eigenvalues[2] * xa.eigenvalues[3])
    if delta_product == 0.0:
        failed.append("delta_product")
    return failed


def literal_failures(coeffs: CoefficientSet) -> List[str]:
    report = check_table1(coeffs)
    return report.failed_rows() + sign_pattern_failures(coeffs)


MODE_CHECKS = {
    TABLE1_LITERAL: literal_failures,
    DIRECT_CONDITIONS: direct_failures,
}


def _evaluate_sample(args):
    """Top-level so Pool can pickle it."""
    box, mode, seed, index = args
    coeffs = draw_from_box(box, sample_generator(seed, index))
    failed = MODE_CHECKS[mode](coeffs)
    return index, failed, (None if failed else coeffs.to_dict())


# ------------------------------------------------------------
# SEARCH
# ------------------------------------------------------------

def find_coefficients(cfg: SearchConfig) -> Union[CoefficientSet, SearchFailure]:
    workers = cfg.resolved_workers()
    histogram: Counter = Counter()
    total = int(cfg.max_samples)
    logger.info("[Search] mode=%s seed=%s max=%s workers=%s", cfg.mode, cfg.rng_seed, total, workers)

    pool = Pool(processes=workers) if workers > 1 else None
    try:
        start = 0
        while start < total:
            stop = min(total, start + cfg.batch_size * workers)
            tasks = [(cfg.box, cfg.mode, cfg.rng_seed, i) for i in range(start, stop)]
            results = pool.map(_evaluate_sample, tasks) if pool else [_evaluate_sample(t) for t in tasks]

            # results come back in index order
            for index, failed, accepted in results:
                if accepted is not None:
                    logger.info("[Search] accepted sample %d", index)
                    return CoefficientSet.from_dict(accepted)
                histogram.update(failed)
            start = stop
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    logger.warning("[Search] exhausted %d samples; most frequent failure %s",
                   total, histogram.most_common(1))
    return SearchFailure(mode=cfg.mode, samples=total, rng_seed=int(cfg.rng_seed), histogram=dict(histogram))


# ------------------------------------------------------------
# OPENNESS PROBE
# ------------------------------------------------------------

def openness_probe(coeffs: CoefficientSet, rel_eps: float, n: int, seed: int = 0) -> float:
    """
    Fraction of n relative perturbations (uniform in [-rel_eps, rel_eps]
    per coefficient) that still pass every row C1-C18.
    """
    if rel_eps < 0.0:
        raise ConfigError("rel_eps must be >= 0")
    if n < 1:
        raise ConfigError("n must be >= 1")
    base = check_table1(coeffs)
    if not base.table1_passed():
        raise PreconditionViolated(f"base set fails condition rows {base.failed_rows()}")

    vec = coeffs.as_vector()
    passed = 0
    histogram: Counter = Counter()
    for i in range(n):
        rng = sample_generator(seed, i)
        noise = rng.uniform(-1.0, 1.0, size=vec.shape) * rel_eps
        failed = check_table1(CoefficientSet.from_vector(vec * (1.0 + noise))).failed_rows()
        if failed:
            histogram.update(failed)
        else:
            passed += 1

    frac = passed / n
    logger.info("[Openness] rel_eps=%g n=%d fraction=%.4f failures=%s", rel_eps, n, frac, dict(histogram))
    return frac
