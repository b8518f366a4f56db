# connections.py
"""
Heteroclinic connections verified by shooting.

Start at `from` + offset * (unit unstable eigenvector inside the carrier)
and integrate until the trajectory enters a tiny ball around `to`.
On L1 the Jacobian is diagonal, so the eigenvectors are coordinate axes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from config import CONNECTION_MAX_TIME, CONNECTION_TARGET_RADIUS, SHOOT_OFFSET, SUBSPACE_TOL
from equilibria import EquilibriumRecord, compute_equilibria
from errors import NoUnstableDirection, PreconditionViolated
from integrator import EnterBall, IntegratorConfig, SectionEvent, Trajectory, integrate_to_section
from vector_field import CoefficientSet, SubspaceId, is_flow_invariant

logger = logging.getLogger(__name__)

VERIFIED_DISTANCE = 1e-6


@dataclass
class ConnectionRecord:
    from_label: str
    to_label: str
    carrier: SubspaceId
    offset: float
    verified: bool
    terminal_distance: float
    transit_time: float
    drift: float = 0.0
    direction: List[float] = field(default_factory=list)
    path: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def name(self) -> str:
        return f"C_{self.from_label[-1]}{self.to_label[-1]}[{self.carrier.name}]"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "from": self.from_label,
            "to": self.to_label,
            "carrier": self.carrier.name,
            "offset": self.offset,
            "verified": self.verified,
            "terminal_distance": self.terminal_distance,
            "transit_time": self.transit_time,
            "drift": self.drift,
            "direction": list(self.direction),
        }


def _connection_config(cfg: Optional[IntegratorConfig]) -> IntegratorConfig:
    if cfg is None:
        return IntegratorConfig(max_time=CONNECTION_MAX_TIME)
    return cfg


def unstable_direction(eq: EquilibriumRecord, carrier: SubspaceId) -> np.ndarray:
    """
    Unit vector along the strongest expanding axis of `eq` inside the
    carrier, L1 itself excluded.
    """
    candidates = [i for i in carrier.free if i != 0]
    expanding = [i for i in candidates if eq.eigenvalues[i] > 0.0]
    if not expanding:
        raise NoUnstableDirection(
            f"{eq.label} has no expanding direction in {carrier.name}: "
            f"eigenvalues {[eq.eigenvalues[i] for i in candidates]}"
        )
    k = max(expanding, key=lambda i: eq.eigenvalues[i])
    v = np.zeros(4)
    v[k] = 1.0
    return v


def _shoot(coeffs, start: EquilibriumRecord, target: EquilibriumRecord, direction, offset,
           cfg: IntegratorConfig):
    x0 = start.point + offset * np.asarray(direction, dtype=float)
    section = EnterBall(target.point, CONNECTION_TARGET_RADIUS, event_id=f"enter_{target.label}")
    traj, outcome = integrate_to_section(coeffs, x0, section, cfg)
    hit = isinstance(outcome, SectionEvent)
    return traj, hit


def verify_connection(
    coeffs: CoefficientSet,
    from_eq: EquilibriumRecord,
    to_eq: EquilibriumRecord,
    carrier: SubspaceId,
    offset: float = SHOOT_OFFSET,
    cfg: Optional[IntegratorConfig] = None,
) -> ConnectionRecord:
    if not is_flow_invariant(carrier):
        raise PreconditionViolated(f"{carrier.name} is not invariant under the flow")
    if offset <= 0.0:
        raise PreconditionViolated("shoot offset must be positive")

    direction = unstable_direction(from_eq, carrier)
    cfg = _connection_config(cfg)
    traj, hit = _shoot(coeffs, from_eq, to_eq, direction, offset, cfg)

    distance = float(np.linalg.norm(traj.final_state - to_eq.point))
    drift = traj.max_subspace_distance(carrier)
    verified = hit and distance <= VERIFIED_DISTANCE and drift <= SUBSPACE_TOL

    rec = ConnectionRecord(
        from_label=from_eq.label,
        to_label=to_eq.label,
        carrier=carrier,
        offset=offset,
        verified=verified,
        terminal_distance=distance,
        transit_time=traj.final_time,
        drift=drift,
        direction=[float(v) for v in direction],
        path=traj,
    )
    logger.info("[Connections] %s verified=%s distance=%.3g time=%.3g (%s)",
                rec.name, verified, distance, traj.final_time, traj.reason.value)
    return rec


def standard_connections(coeffs: CoefficientSet, cfg: Optional[IntegratorConfig] = None,
                         offset: float = SHOOT_OFFSET) -> List[ConnectionRecord]:
    """C_ab in P12, then the C_ba representatives in P13 and P14."""
    xa, xb = compute_equilibria(coeffs)
    return [
        verify_connection(coeffs, xa, xb, SubspaceId.P12, offset, cfg),
        verify_connection(coeffs, xb, xa, SubspaceId.P13, offset, cfg),
        verify_connection(coeffs, xb, xa, SubspaceId.P14, offset, cfg),
    ]


# ------------------------------------------------------------
# FAN OF C_ba INSIDE S134
# ------------------------------------------------------------

@dataclass
class FanReport:
    angles: List[float]
    reached: List[bool]
    transit_times: List[float]

    @property
    def fraction(self) -> float:
        return sum(self.reached) / len(self.reached) if self.reached else 0.0

    def to_dict(self) -> dict:
        return {
            "angles": self.angles,
            "reached": self.reached,
            "transit_times": self.transit_times,
            "fraction": self.fraction,
        }


def verify_unstable_fan(
    coeffs: CoefficientSet,
    n_angles: int = 9,
    offset: float = SHOOT_OFFSET,
    cfg: Optional[IntegratorConfig] = None,
) -> FanReport:
    """
    Shoots from xi_b along cos(t) e3 + sin(t) e4, t in [0, pi/2], and
    records which shots reach xi_a inside S134.
    """
    if n_angles < 1:
        raise PreconditionViolated("n_angles must be >= 1")
    xa, xb = compute_equilibria(coeffs)
    if xb.eigenvalues[2] <= 0.0 or xb.eigenvalues[3] <= 0.0:
        raise NoUnstableDirection("xi_b is not a saddle with a two-dimensional unstable manifold in S134")

    cfg = _connection_config(cfg)
    angles = np.linspace(0.0, 0.5 * math.pi, n_angles) if n_angles > 1 else np.array([0.25 * math.pi])
    reached, times = [], []
    for a in angles:
        direction = np.array([0.0, 0.0, math.cos(a), math.sin(a)])
        traj, hit = _shoot(coeffs, xb, xa, direction, offset, cfg)
        reached.append(bool(hit))
        times.append(traj.final_time)

    report = FanReport([float(a) for a in angles], reached, times)
    logger.info("[Connections] unstable fan of xi_b: %d/%d shots reach xi_a", sum(reached), len(reached))
    return report
