# integrator.py
"""
Dormand-Prince 5(4) integration of the vector field.

- Butcher tableau, error weights and the dense-output matrix are taken
  from scipy.integrate.RK45 so the coefficients are not retyped here.
- PI step-size control on the error per unit step
  ||err|| / (h * LOCAL_TOL_FRACTION * (abs_tol + rel_tol * max(||y_old||, ||y_new||))),
  so the global error stays proportional to the requested tolerance.
- Sections are located on the quartic dense output and bisected.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import RK45
from scipy.optimize import bisect

from config import EVENT_TOL, INTEGRATOR_DEFAULTS
from errors import ConfigError
from vector_field import CoefficientSet, SubspaceId, as_state, field_rhs, restricted_spectrum, subspace_distance

logger = logging.getLogger(__name__)


# ---------- tableau ----------
_A = RK45.A
_B = RK45.B
_E = RK45.E
_P = RK45.P
N_STAGES = RK45.n_stages
ERROR_ORDER = RK45.error_estimator_order

# ---------- step control ----------
SAFETY = 0.9
BETA = 0.04
# err per unit step scales like h**ERROR_ORDER
ALPHA = 1.0 / ERROR_ORDER - 0.75 * BETA
LOCAL_TOL_FRACTION = 0.1
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
MIN_ERR_PREV = 1e-4
TIME_EPS = 1e-12
MIN_STEP_REL = 1e-14

EVENT_SUBDIVISIONS = 8


class TerminationReason(str, Enum):
    TimeLimit = "TimeLimit"
    StepLimit = "StepLimit"
    EventHit = "EventHit"
    Blowup = "Blowup"
    ConvergedToPoint = "ConvergedToPoint"


# ------------------------------------------------------------
# CONFIG
# ------------------------------------------------------------

@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = INTEGRATOR_DEFAULTS["rel_tol"]
    abs_tol: float = INTEGRATOR_DEFAULTS["abs_tol"]
    initial_step: float = INTEGRATOR_DEFAULTS["initial_step"]
    max_step: float = INTEGRATOR_DEFAULTS["max_step"]
    max_time: float = INTEGRATOR_DEFAULTS["max_time"]
    max_steps: int = INTEGRATOR_DEFAULTS["max_steps"]
    blowup_norm: float = INTEGRATOR_DEFAULTS["blowup_norm"]
    convergence_tol: float = INTEGRATOR_DEFAULTS["convergence_tol"]
    fixed_step: Optional[float] = None     # disables error control (order studies)

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "initial_step", "max_step", "max_time", "blowup_norm"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ConfigError(f"{name} must be a positive finite number, got {v!r}")
        if self.convergence_tol < 0.0:
            raise ConfigError("convergence_tol must be >= 0")
        if int(self.max_steps) < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.fixed_step is not None and not (np.isfinite(self.fixed_step) and self.fixed_step > 0.0):
            raise ConfigError("fixed_step must be positive when given")

    def with_changes(self, **changes) -> "IntegratorConfig":
        data = asdict(self)
        data.update(changes)
        return IntegratorConfig(**data)

    def to_dict(self) -> dict:
        return asdict(self)


# ------------------------------------------------------------
# RESULTS
# ------------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    reason: TerminationReason
    accepted_steps: int = 0
    rejected_steps: int = 0

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def min_distance_to(self, point) -> float:
        return float(np.min(np.linalg.norm(self.states - np.asarray(point, dtype=float), axis=1)))

    def max_subspace_distance(self, sid: SubspaceId) -> float:
        return max(subspace_distance(sid, s) for s in self.states)

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.states, columns=["x1", "x2", "x3", "x4"])
        df.insert(0, "t", self.times)
        return df

    def to_csv(self, path_or_buf=None) -> Optional[str]:
        """Returns the text when no target is given."""
        return self.to_frame().to_csv(path_or_buf, index=False, float_format="%.17g")

    def summary(self) -> dict:
        return {
            "reason": self.reason.value,
            "final_time": self.final_time,
            "final_state": [float(v) for v in self.final_state],
            "samples": int(len(self.times)),
            "accepted_steps": self.accepted_steps,
            "rejected_steps": self.rejected_steps,
        }


@dataclass(frozen=True)
class SectionEvent:
    event_id: str
    time: float
    state: np.ndarray
    direction: int


@dataclass(frozen=True)
class Timeout:
    """No crossing; `reason` says why the integration stopped."""
    max_time: float
    reason: TerminationReason
    final_state: np.ndarray


# ------------------------------------------------------------
# SECTIONS
# ------------------------------------------------------------

class SectionSpec:
    """Scalar event g(x) = 0 crossed in a required direction (+1 or -1)."""
    event_id = "section"
    direction = 1

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def crosses(self, g_before: float, g_after: float) -> bool:
        if self.direction < 0:
            return g_before > 0.0 >= g_after
        return g_before < 0.0 <= g_after

    def already_past(self, x: np.ndarray) -> bool:
        g = self.value(x)
        return g <= 0.0 if self.direction < 0 else g >= 0.0


class EnterBall(SectionSpec):
    direction = -1

    def __init__(self, center, radius: float, event_id: str = "enter_ball"):
        if radius <= 0.0:
            raise ConfigError("ball radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.event_id = event_id

    def value(self, x):
        return float(np.linalg.norm(x - self.center)) - self.radius


class RadiusInPlane(SectionSpec):
    """g = sqrt(x3^2 + x4^2) - h, crossed outward."""
    direction = 1

    def __init__(self, h: float, event_id: str = "radius_in_plane"):
        if h <= 0.0:
            raise ConfigError("section radius must be positive")
        self.h = float(h)
        self.event_id = event_id

    def value(self, x):
        return float(np.hypot(x[2], x[3])) - self.h


# ------------------------------------------------------------
# STEPPER
# ------------------------------------------------------------

def _rk_step(c: CoefficientSet, y: np.ndarray, f: np.ndarray, h: float):
    K = np.empty((N_STAGES + 1, y.size))
    K[0] = f
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(1, N_STAGES):
            dy = K[:s].T @ _A[s, :s] * h
            K[s] = field_rhs(c, y + dy)
        y_new = y + h * (K[:-1].T @ _B)
        K[-1] = field_rhs(c, y_new)
        err = h * (K.T @ _E)
    return y_new, K, err


def dense_state(y_old: np.ndarray, h: float, K: np.ndarray, theta: float) -> np.ndarray:
    """State at t_old + theta*h from the free quartic interpolant."""
    Q = K.T @ _P
    p = np.cumprod(np.full(_P.shape[1], theta))
    return y_old + h * (Q @ p)


def _converged(c: CoefficientSet, y: np.ndarray, f: np.ndarray, cfg: IntegratorConfig) -> bool:
    if float(np.linalg.norm(f)) >= cfg.convergence_tol:
        return False
    return bool(np.all(restricted_spectrum(c, y).real < 0.0))


def _locate_event(section: SectionSpec, y_old, h, K, g_old) -> Optional[float]:
    """Smallest theta in (0, 1] where the section is crossed inside this step."""
    prev_theta, prev_g = 0.0, g_old
    for theta in np.linspace(0.0, 1.0, EVENT_SUBDIVISIONS + 1)[1:]:
        g = section.value(dense_state(y_old, h, K, theta))
        if section.crosses(prev_g, g):
            if g == 0.0:
                return float(theta)
            return float(bisect(
                lambda s: section.value(dense_state(y_old, h, K, s)),
                prev_theta, theta, xtol=1e-15, rtol=4.0 * np.finfo(float).eps,
            ))
        prev_theta, prev_g = theta, g
    return None


def _run(coeffs: CoefficientSet, x0, cfg: IntegratorConfig, section: Optional[SectionSpec] = None):
    y = np.array(as_state(x0), dtype=float)
    t = 0.0
    times: List[float] = [t]
    states: List[np.ndarray] = [y.copy()]
    accepted = rejected = 0
    event = None

    def _done(reason):
        return Trajectory(np.array(times), np.vstack(states), reason, accepted, rejected), event

    if section is not None and section.already_past(y):
        event = SectionEvent(section.event_id, 0.0, as_state(y), section.direction)
        return _done(TerminationReason.EventHit)

    f = field_rhs(coeffs, y)
    if _converged(coeffs, y, f, cfg):
        return _done(TerminationReason.ConvergedToPoint)

    g_old = section.value(y) if section is not None else None
    h = min(cfg.fixed_step or cfg.initial_step, cfg.max_step)
    err_prev = MIN_ERR_PREV
    just_rejected = False

    while True:
        if accepted >= cfg.max_steps:
            return _done(TerminationReason.StepLimit)
        remaining = cfg.max_time - t
        if remaining <= TIME_EPS * max(1.0, cfg.max_time):
            return _done(TerminationReason.TimeLimit)

        h_try = min(h, remaining) if cfg.fixed_step else min(h, cfg.max_step, remaining)
        y_new, K, err = _rk_step(coeffs, y, f, h_try)

        factor = 1.0
        if cfg.fixed_step is None:
            with np.errstate(over="ignore", invalid="ignore"):
                scale = cfg.abs_tol + cfg.rel_tol * max(np.linalg.norm(y), np.linalg.norm(y_new))
                err_norm = float(np.linalg.norm(err) / (h_try * LOCAL_TOL_FRACTION * scale))
            if not np.isfinite(err_norm) or err_norm > 1.0:
                rejected += 1
                shrink = SAFETY * err_norm ** -ALPHA if np.isfinite(err_norm) else MIN_FACTOR
                h = h_try * min(1.0, max(MIN_FACTOR, shrink))
                just_rejected = True
                if h < MIN_STEP_REL * max(1.0, abs(t)):
                    logger.warning("[Integrate] step size underflow at t=%.6g, |x|=%.3g",
                                   t, float(np.linalg.norm(y)))
                    return _done(TerminationReason.Blowup)
                continue
            if err_norm == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * err_norm ** -ALPHA * err_prev ** BETA
                factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            if just_rejected:
                factor = min(1.0, factor)
            err_prev = max(err_norm, MIN_ERR_PREV)
            just_rejected = False

        accepted += 1
        t_new = t + h_try

        if not np.all(np.isfinite(y_new)):
            times.append(t_new)
            states.append(y_new.copy())
            return _done(TerminationReason.Blowup)

        if section is not None:
            # sub-sampled so a ball grazed inside one step is not missed
            theta = _locate_event(section, y, h_try, K, g_old)
            if theta is not None:
                x_ev = dense_state(y, h_try, K, theta)
                t_ev = t + theta * h_try
                if abs(section.value(x_ev)) > EVENT_TOL * (1.0 + float(np.linalg.norm(x_ev))):
                    logger.warning("[Integrate] event %s located with |g|=%.3g", section.event_id,
                                   abs(section.value(x_ev)))
                if t_ev > t:
                    times.append(t_ev)
                    states.append(x_ev.copy())
                event = SectionEvent(section.event_id, t_ev, as_state(x_ev), section.direction)
                return _done(TerminationReason.EventHit)
            g_old = section.value(y_new)

        t, y, f = t_new, y_new, K[-1].copy()
        times.append(t)
        states.append(y.copy())

        if float(np.linalg.norm(y)) > cfg.blowup_norm:
            return _done(TerminationReason.Blowup)
        if _converged(coeffs, y, f, cfg):
            return _done(TerminationReason.ConvergedToPoint)

        if cfg.fixed_step is None:
            h = h_try * factor


# ------------------------------------------------------------
# PUBLIC API
# ------------------------------------------------------------

def integrate(coeffs: CoefficientSet, x0, cfg: Optional[IntegratorConfig] = None) -> Trajectory:
    cfg = cfg or IntegratorConfig()
    traj, _ = _run(coeffs, x0, cfg)
    logger.debug("[Integrate] %s after %d steps (t=%.6g)", traj.reason.value, traj.accepted_steps, traj.final_time)
    return traj


def integrate_to_section(
    coeffs: CoefficientSet,
    x0,
    section: SectionSpec,
    cfg: Optional[IntegratorConfig] = None,
) -> Tuple[Trajectory, Union[SectionEvent, Timeout]]:
    cfg = cfg or IntegratorConfig()
    traj, event = _run(coeffs, x0, cfg, section)
    if event is not None:
        return traj, event
    return traj, Timeout(max_time=cfg.max_time, reason=traj.reason, final_state=traj.final_state)
