# classification.py
"""
Loop tracking around the two subcycles.

One loop runs from an entry into the ball around xi_b to the next one:

    enter B(xi_b, r_b) -> leave through sqrt(x3^2 + x4^2) = h -> enter B(xi_a, r_a) -> enter B(xi_b, r_b)

The exit angle phi = atan2(|x4|, |x3|) at the middle section says which
branch of C_ba the loop followed: phi ~ 0 is the P13 branch, phi ~ pi/2
the P14 branch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from config import CLASSIFIER_DEFAULTS
from equilibria import compute_equilibria
from errors import ConfigError
from integrator import (
    EnterBall,
    IntegratorConfig,
    RadiusInPlane,
    SectionEvent,
    TerminationReason,
    integrate_to_section,
)
from vector_field import CoefficientSet, as_state

logger = logging.getLogger(__name__)


class Outcome(str, Enum):
    AttractedP13 = "AttractedP13"
    AttractedP14 = "AttractedP14"
    OtherAttractor = "OtherAttractor"
    Escaped = "Escaped"
    Undecided = "Undecided"


OUTCOMES = tuple(o.value for o in Outcome)


@dataclass(frozen=True)
class ClassifierConfig:
    r_a: float = CLASSIFIER_DEFAULTS["r_a"]
    r_b: float = CLASSIFIER_DEFAULTS["r_b"]
    h: float = CLASSIFIER_DEFAULTS["h"]
    phi_cutoff: float = CLASSIFIER_DEFAULTS["phi_cutoff"]
    loops_max: int = CLASSIFIER_DEFAULTS["loops_max"]
    confirm_loops: int = CLASSIFIER_DEFAULTS["confirm_loops"]
    section_timeout: float = CLASSIFIER_DEFAULTS["section_timeout"]
    timeout_factor: float = CLASSIFIER_DEFAULTS["timeout_factor"]
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        for name in ("r_a", "r_b", "h", "section_timeout", "timeout_factor"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 < self.phi_cutoff < 0.25 * math.pi:
            raise ConfigError("phi_cutoff must lie in (0, pi/4)")
        if self.loops_max < 1 or self.confirm_loops < 1:
            raise ConfigError("loops_max and confirm_loops must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["integrator"] = self.integrator.to_dict()
        return d


@dataclass
class LoopRecord:
    index: int
    phi: float
    min_dist_a: float
    min_dist_b: float
    duration: float

    def to_dict(self) -> dict:
        return asdict(self)


def exit_angle(x) -> float:
    return float(math.atan2(abs(x[3]), abs(x[2])))


def _non_increasing(values: List[float]) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def _decide(loops: List[LoopRecord], cfg: ClassifierConfig) -> Optional[Outcome]:
    if len(loops) < cfg.confirm_loops:
        return None
    last = loops[-cfg.confirm_loops:]
    shrinking = (_non_increasing([r.min_dist_a for r in last])
                 and _non_increasing([r.min_dist_b for r in last]))
    if not shrinking:
        return None
    if all(r.phi < cfg.phi_cutoff for r in last):
        return Outcome.AttractedP13
    if all(r.phi > 0.5 * math.pi - cfg.phi_cutoff for r in last):
        return Outcome.AttractedP14
    return None


def _stopped(reason: TerminationReason, final_state=None, cycle_balls=()) -> Outcome:
    """Outcome for a leg that ended without reaching its section.

    `cycle_balls` holds (point, radius) pairs for the cycle equilibria; a
    stationary end inside one of them is not an attractor away from the cycle.
    """
    if reason == TerminationReason.Blowup:
        return Outcome.Escaped
    if reason == TerminationReason.ConvergedToPoint:
        if final_state is not None:
            end = np.asarray(final_state, dtype=float)
            if any(np.linalg.norm(end - np.asarray(p)) <= r for p, r in cycle_balls):
                return Outcome.Undecided
        return Outcome.OtherAttractor
    if reason == TerminationReason.TimeLimit:
        # bounded without reaching the next section
        return Outcome.OtherAttractor
    return Outcome.Undecided


def classify_trajectory(
    coeffs: CoefficientSet,
    x0,
    loops_max: Optional[int] = None,
    cfg: Optional[ClassifierConfig] = None,
) -> Tuple[Outcome, List[LoopRecord]]:
    cfg = cfg or ClassifierConfig()
    loops_max = cfg.loops_max if loops_max is None else int(loops_max)
    if loops_max < 1:
        raise ConfigError("loops_max must be >= 1")

    xa, xb = compute_equilibria(coeffs)
    pa, pb = xa.point, xb.point
    enter_b = EnterBall(pb, cfg.r_b, event_id="enter_b")
    exit_b = RadiusInPlane(cfg.h, event_id="exit_b")
    enter_a = EnterBall(pa, cfg.r_a, event_id="enter_a")
    balls = ((pa, cfg.r_a), (pb, cfg.r_b))

    state = as_state(x0)
    loops: List[LoopRecord] = []
    durations: List[float] = []

    def _leg(section):
        timeout = cfg.section_timeout
        if durations:
            timeout = max(timeout, cfg.timeout_factor * float(np.median(durations)))
        traj, ev = integrate_to_section(coeffs, state, section, cfg.integrator.with_changes(max_time=timeout))
        return traj, ev

    # approach: reach the neighbourhood of xi_b once
    traj, ev = _leg(enter_b)
    if not isinstance(ev, SectionEvent):
        return _stopped(traj.reason, traj.final_state, balls), loops
    state = ev.state

    while len(loops) < loops_max:
        # passage near xi_b, leaving along C_ba
        traj, ev = _leg(exit_b)
        if not isinstance(ev, SectionEvent):
            return _stopped(traj.reason, traj.final_state, balls), loops
        duration = traj.final_time
        min_b = traj.min_distance_to(pb)
        phi = exit_angle(ev.state)
        state = ev.state

        # C_ba to xi_a, then C_ab back to xi_b
        min_a = math.inf
        for section in (enter_a, enter_b):
            traj, ev = _leg(section)
            min_a = min(min_a, traj.min_distance_to(pa))
            duration += traj.final_time
            if not isinstance(ev, SectionEvent):
                return _stopped(traj.reason, traj.final_state, balls), loops
            state = ev.state

        loops.append(LoopRecord(len(loops), phi, min_a, min_b, duration))
        durations.append(duration)

        verdict = _decide(loops, cfg)
        if verdict is not None:
            logger.debug("[Classify] %s after %d loops", verdict.value, len(loops))
            return verdict, loops

    return Outcome.Undecided, loops
