# stability_index.py
"""
Categorical estimate of the local stability index at a point of a connection.

For each eps on a decreasing ladder, the fraction of uniform samples in
the eps-ball that end up attracted to the cycle is measured. Verdicts:

- IndexPlusInfinityLike   fractions >= 1 - 1e-3 at the three smallest eps
- IndexMinusInfinityLike  fractions <= 1e-3 at the three smallest eps
- FiniteIndexLike         local log-log slopes over the last five levels
                          stay within 20% of their mean
- Inconclusive            anything else
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.stats import linregress

from basin import CYCLE_OUTCOME, CYCLES, P14_CYCLE, sample_in_ball
from classification import ClassifierConfig, classify_trajectory
from coefficient_search import sample_generator
from config import INDEX_LADDER_LEVELS, INDEX_LADDER_RATIO, INDEX_LADDER_TOP, worker_count
from connections import ConnectionRecord
from errors import ConfigError, PreconditionViolated
from vector_field import CoefficientSet, as_state

logger = logging.getLogger(__name__)

EXTREME_TOL = 1e-3
EXTREME_LEVELS = 3
SLOPE_LEVELS = 5
SLOPE_REL_SPREAD = 0.2
ON_CONNECTION_TOL = 1e-6


class IndexVerdict(str, Enum):
    IndexPlusInfinityLike = "IndexPlusInfinityLike"
    IndexMinusInfinityLike = "IndexMinusInfinityLike"
    FiniteIndexLike = "FiniteIndexLike"
    Inconclusive = "Inconclusive"


# Expected verdicts for the connections of each cycle: both principal
# connections at -infinity, the non-principal pair at +infinity and finite.
EXPECTED_VERDICTS = {
    "principal": (IndexVerdict.IndexMinusInfinityLike, IndexVerdict.IndexMinusInfinityLike),
    "non_principal": (IndexVerdict.IndexPlusInfinityLike, IndexVerdict.FiniteIndexLike),
}


def default_ladder(top: float = INDEX_LADDER_TOP, levels: int = INDEX_LADDER_LEVELS,
                   ratio: float = INDEX_LADDER_RATIO) -> List[float]:
    return [top * ratio ** k for k in range(levels)]


@dataclass
class IndexEstimate:
    base_point: List[float]
    ladder: List[float]
    n_per_level: int
    seed: int
    counts: List[int]
    fractions: List[float]
    verdict: IndexVerdict
    slope: Optional[float] = None
    local_slopes: List[float] = field(default_factory=list)
    cycle_id: Optional[str] = None
    connection: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "base_point": self.base_point,
            "cycle_id": self.cycle_id,
            "connection": self.connection,
            "ladder": self.ladder,
            "n_per_level": self.n_per_level,
            "seed": self.seed,
            "counts": self.counts,
            "fractions": self.fractions,
            "slope": self.slope,
            "local_slopes": self.local_slopes,
            "verdict": self.verdict.value,
        }


# ------------------------------------------------------------
# VERDICT
# ------------------------------------------------------------

def fitted_slope(ladder: Sequence[float], fractions: Sequence[float]) -> Optional[float]:
    """Slope of log(fraction) against log(eps) over levels with 0 < fraction < 1."""
    pts = [(np.log(e), np.log(f)) for e, f in zip(ladder, fractions) if 0.0 < f < 1.0]
    if len(pts) < 2:
        return None
    x, y = zip(*pts)
    return float(linregress(x, y).slope)


def local_slopes(ladder: Sequence[float], fractions: Sequence[float]) -> List[float]:
    out = []
    for k in range(1, len(ladder)):
        f0, f1 = fractions[k - 1], fractions[k]
        if not (0.0 < f0 < 1.0 and 0.0 < f1 < 1.0):
            continue
        out.append(float((np.log(f1) - np.log(f0)) / (np.log(ladder[k]) - np.log(ladder[k - 1]))))
    return out


def index_verdict(ladder: Sequence[float], fractions: Sequence[float]) -> IndexVerdict:
    smallest = list(fractions[-EXTREME_LEVELS:])
    if smallest and all(f >= 1.0 - EXTREME_TOL for f in smallest):
        return IndexVerdict.IndexPlusInfinityLike
    if smallest and all(f <= EXTREME_TOL for f in smallest):
        return IndexVerdict.IndexMinusInfinityLike

    if len(ladder) >= SLOPE_LEVELS:
        tail_l, tail_f = ladder[-SLOPE_LEVELS:], fractions[-SLOPE_LEVELS:]
        if all(0.0 < f < 1.0 for f in tail_f):
            slopes = local_slopes(tail_l, tail_f)
            mean = float(np.mean(slopes))
            if mean == 0.0:
                if all(s == 0.0 for s in slopes):
                    return IndexVerdict.FiniteIndexLike
            elif all(abs(s - mean) <= SLOPE_REL_SPREAD * abs(mean) for s in slopes):
                return IndexVerdict.FiniteIndexLike
    return IndexVerdict.Inconclusive


# ------------------------------------------------------------
# SAMPLING
# ------------------------------------------------------------

def distance_to_path(point: np.ndarray, states: np.ndarray) -> float:
    """Distance from a point to the polyline through the recorded states."""
    if len(states) == 1:
        return float(np.linalg.norm(point - states[0]))
    a, b = states[:-1], states[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.where(denom > 0.0, np.einsum("ij,ij->i", point - a, ab) / np.where(denom > 0.0, denom, 1.0), 0.0)
    proj = a + np.clip(t, 0.0, 1.0)[:, None] * ab
    return float(np.min(np.linalg.norm(proj - point, axis=1)))


def point_on_connection(connection: ConnectionRecord, fraction: float = 0.5) -> np.ndarray:
    """Point at the given fraction of the arc length of a verified connection path."""
    if connection.path is None:
        raise PreconditionViolated(f"{connection.name} has no recorded path")
    states = connection.path.states
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(states, axis=0), axis=1))])
    target = float(np.clip(fraction, 0.0, 1.0)) * s[-1]
    return np.array([np.interp(target, s, states[:, j]) for j in range(states.shape[1])])


def _index_sample(args):
    coeffs, point, eps, key, cycle_id, cfg = args
    x0 = sample_in_ball(point, eps, sample_generator(key, 0))
    outcome, _ = classify_trajectory(coeffs, x0, cfg=cfg)
    return outcome == CYCLE_OUTCOME[cycle_id]


def _cycle_for(connection: Optional[ConnectionRecord], cycle_id: Optional[str]) -> str:
    if cycle_id is not None:
        if cycle_id not in CYCLES:
            raise ConfigError(f"unknown cycle id {cycle_id!r}")
        return cycle_id
    if connection is not None:
        for cid, plane in CYCLES.items():
            if connection.carrier == plane:
                return cid
    return P14_CYCLE


def stability_index_estimate(
    coeffs: CoefficientSet,
    point,
    ladder: Optional[Sequence[float]] = None,
    n_per_level: int = 500,
    seed: int = 0,
    connection: Optional[ConnectionRecord] = None,
    cycle_id: Optional[str] = None,
    attracted: Optional[Callable[[np.ndarray], bool]] = None,
    cfg: Optional[ClassifierConfig] = None,
    workers: Optional[int] = None,
) -> IndexEstimate:
    """
    `attracted` replaces the cycle classifier (control runs on other
    invariant sets); it runs serially since arbitrary callables may not pickle.
    """
    ladder = list(ladder) if ladder is not None else default_ladder()
    if not ladder or any(e <= 0.0 for e in ladder):
        raise ConfigError("ladder levels must be positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("ladder must be strictly decreasing")
    if n_per_level < 1:
        raise ConfigError("n_per_level must be >= 1")

    point = np.array(as_state(point), dtype=float)
    if attracted is None:
        if connection is None or not connection.verified or connection.path is None:
            raise PreconditionViolated("base point must lie on a verified connection")
        if distance_to_path(point, connection.path.states) > ON_CONNECTION_TOL:
            raise PreconditionViolated(f"base point is not on {connection.name}")
    cid = _cycle_for(connection, cycle_id)
    cfg = cfg or ClassifierConfig()
    workers = workers or worker_count()

    counts: List[int] = []
    for level, eps in enumerate(ladder):
        keys = [int(seed) ^ (level * n_per_level + i) for i in range(n_per_level)]
        if attracted is not None:
            hits = [bool(attracted(sample_in_ball(point, eps, sample_generator(k, 0)))) for k in keys]
        else:
            tasks = [(coeffs, point, eps, k, cid, cfg) for k in keys]
            if workers > 1 and n_per_level > 1:
                with Pool(processes=min(workers, n_per_level)) as pool:
                    hits = pool.map(_index_sample, tasks)
            else:
                hits = [_index_sample(t) for t in tasks]
        counts.append(int(sum(hits)))
        logger.info("[Index] eps=%.3g attracted %d/%d", eps, counts[-1], n_per_level)

    fractions = [c / n_per_level for c in counts]
    verdict = index_verdict(ladder, fractions)
    est = IndexEstimate(
        base_point=[float(v) for v in point],
        ladder=[float(e) for e in ladder],
        n_per_level=int(n_per_level),
        seed=int(seed),
        counts=counts,
        fractions=fractions,
        verdict=verdict,
        slope=fitted_slope(ladder, fractions),
        local_slopes=local_slopes(ladder, fractions),
        cycle_id=cid,
        connection=connection.name if connection is not None else None,
    )
    logger.info("[Index] verdict %s (slope %s)", verdict.value, est.slope)
    return est