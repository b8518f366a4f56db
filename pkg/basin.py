# basin.py
"""
Monte Carlo basin fractions for the two subcycles.

- The tube around a cycle is a union of eps-balls whose centres are
  spread evenly by arc length along the verified connection paths.
- Sample i: Philox(seed ^ i) picks a centre, a Gaussian direction and a
  radius eps * u^(1/4) (uniform in the 4-ball).
- Each sample is classified by loop tracking; counts are merged, so the
  result does not depend on scheduling.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

from classification import OUTCOMES, ClassifierConfig, Outcome, classify_trajectory
from coefficient_search import SEED_MASK, sample_generator
from config import CONFIDENCE_LEVEL, TUBE_CENTERS, worker_count
from connections import ConnectionRecord, standard_connections
from errors import ConfigError, PreconditionViolated
from vector_field import CoefficientSet, SubspaceId

logger = logging.getLogger(__name__)

P13_CYCLE = "P13cycle"
P14_CYCLE = "P14cycle"
CYCLES = {P13_CYCLE: SubspaceId.P13, P14_CYCLE: SubspaceId.P14}
CYCLE_OUTCOME = {P13_CYCLE: Outcome.AttractedP13, P14_CYCLE: Outcome.AttractedP14}

LOG_COLUMNS = ["sample", "seed", "outcome", "loops", "final_phi"]


# ------------------------------------------------------------
# STATISTICS
# ------------------------------------------------------------

def wilson_interval(k: int, n: int, level: float = CONFIDENCE_LEVEL) -> Tuple[float, float]:
    if n <= 0:
        return (0.0, 0.0)
    z = float(norm.ppf(0.5 + 0.5 * level))
    phat = k / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class FractionEstimate:
    fraction: float
    lower: float
    upper: float

    @classmethod
    def from_counts(cls, k: int, n: int, level: float = CONFIDENCE_LEVEL) -> "FractionEstimate":
        lo, hi = wilson_interval(k, n, level)
        return cls(k / n if n else 0.0, lo, hi)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)

    def to_dict(self) -> dict:
        return {"fraction": self.fraction, "ci_lower": self.lower, "ci_upper": self.upper}


# ------------------------------------------------------------
# REPORT
# ------------------------------------------------------------

@dataclass
class BasinReport:
    cycle_id: str
    eps: float
    n: int
    seed: int
    counts: Dict[str, int]
    confidence_level: float = CONFIDENCE_LEVEL
    classifier: Dict = field(default_factory=dict)
    tube_centers: int = 0

    def fraction(self, outcome: str) -> FractionEstimate:
        return FractionEstimate.from_counts(self.counts.get(outcome, 0), self.n, self.confidence_level)

    @property
    def attracted_p13(self) -> FractionEstimate:
        return self.fraction(Outcome.AttractedP13.value)

    @property
    def attracted_p14(self) -> FractionEstimate:
        return self.fraction(Outcome.AttractedP14.value)

    @property
    def attracted_own(self) -> FractionEstimate:
        return self.fraction(CYCLE_OUTCOME[self.cycle_id].value)

    def to_dict(self) -> dict:
        return {
            "cycle_id": self.cycle_id,
            "eps": self.eps,
            "n": self.n,
            "seed": self.seed,
            "counts": {k: int(self.counts.get(k, 0)) for k in OUTCOMES},
            "fractions": {
                Outcome.AttractedP13.value: self.attracted_p13.to_dict(),
                Outcome.AttractedP14.value: self.attracted_p14.to_dict(),
            },
            "confidence_level": self.confidence_level,
            "tube_centers": self.tube_centers,
            "classifier": self.classifier,
        }


# ------------------------------------------------------------
# TUBE GEOMETRY
# ------------------------------------------------------------

def cycle_connections(cycle_id: str, connections: Sequence[ConnectionRecord]) -> List[ConnectionRecord]:
    """C_ab in P12 plus the C_ba branch lying in the cycle's plane."""
    if cycle_id not in CYCLES:
        raise ConfigError(f"unknown cycle id {cycle_id!r}; expected one of {sorted(CYCLES)}")
    plane = CYCLES[cycle_id]
    picked = [c for c in connections if c.carrier == SubspaceId.P12] + \
             [c for c in connections if c.carrier == plane]
    if len(picked) != 2 or not all(c.verified and c.path is not None for c in picked):
        raise PreconditionViolated(f"connections of {cycle_id} are not verified")
    return picked


def tube_centers(paths: Sequence[np.ndarray], n_centers: int = TUBE_CENTERS) -> np.ndarray:
    """n_centers points equally spaced by arc length along the concatenated paths."""
    pts = np.vstack(paths)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0.0:
        return pts[:1].copy()
    # drop repeated samples so interpolation nodes are strictly increasing
    keep = np.concatenate([[True], seg > 0.0])
    s, pts = s[keep], pts[keep]
    targets = np.linspace(0.0, s[-1], n_centers)
    return np.column_stack([np.interp(targets, s, pts[:, j]) for j in range(pts.shape[1])])


def sample_in_tube(centers: np.ndarray, eps: float, rng: np.random.Generator) -> np.ndarray:
    c = centers[rng.integers(len(centers))]
    direction = rng.standard_normal(centers.shape[1])
    direction /= np.linalg.norm(direction)
    radius = eps * rng.random() ** (1.0 / centers.shape[1])
    return c + radius * direction


def sample_in_ball(center: np.ndarray, eps: float, rng: np.random.Generator) -> np.ndarray:
    return sample_in_tube(np.atleast_2d(center), eps, rng)


# ------------------------------------------------------------
# SAMPLING
# ------------------------------------------------------------

def _classify_sample(args):
    """Top-level so Pool can pickle it."""
    coeffs, centers, eps, seed, index, cfg = args
    x0 = sample_in_tube(centers, eps, sample_generator(seed, index))
    outcome, loops = classify_trajectory(coeffs, x0, cfg=cfg)
    final_phi = loops[-1].phi if loops else float("nan")
    return index, outcome.value, len(loops), final_phi


def run_samples(coeffs, centers, eps, n, seed, cfg, workers) -> List[tuple]:
    tasks = [(coeffs, centers, eps, seed, i, cfg) for i in range(n)]
    if workers <= 1 or n == 1:
        return [_classify_sample(t) for t in tasks]
    with Pool(processes=min(workers, n)) as pool:
        return pool.map(_classify_sample, tasks, chunksize=max(1, n // (4 * workers)))


def write_sample_log(rows: Sequence[tuple], seed: int, path_or_buf) -> None:
    df = pd.DataFrame(
        [(i, (int(seed) ^ i) & SEED_MASK, outcome, loops, phi) for i, outcome, loops, phi in rows],
        columns=LOG_COLUMNS,
    )
    df.to_csv(path_or_buf, index=False, float_format="%.17g")


def basin_fraction(
    coeffs: CoefficientSet,
    cycle_id: str,
    eps: float,
    n: int,
    seed: int = 0,
    cfg: Optional[ClassifierConfig] = None,
    connections: Optional[Sequence[ConnectionRecord]] = None,
    workers: Optional[int] = None,
    log_path=None,
    n_centers: int = TUBE_CENTERS,
) -> BasinReport:
    if not eps > 0.0:
        raise PreconditionViolated("eps must be positive")
    if n < 1:
        raise PreconditionViolated("sample count n must be >= 1")
    cfg = cfg or ClassifierConfig()
    if connections is None:
        connections = standard_connections(coeffs)
    picked = cycle_connections(cycle_id, connections)
    centers = tube_centers([c.path.states for c in picked], n_centers)
    workers = workers or worker_count()

    logger.info("[Basin] %s eps=%g n=%d seed=%d workers=%d", cycle_id, eps, n, seed, workers)
    rows = run_samples(coeffs, centers, eps, n, seed, cfg, workers)
    counts = Counter(outcome for _, outcome, _, _ in rows)

    if log_path is not None:
        write_sample_log(rows, seed, log_path)

    report = BasinReport(
        cycle_id=cycle_id,
        eps=eps,
        n=n,
        seed=int(seed),
        counts={k: int(counts.get(k, 0)) for k in OUTCOMES},
        classifier=cfg.to_dict(),
        tube_centers=len(centers),
    )
    logger.info("[Basin] %s eps=%g counts=%s", cycle_id, eps, report.counts)
    return report
