# equilibria.py
"""
Closed-form equilibria on L1 and their eigenvalues.

On L1 the equilibria xi_a, xi_b solve 1 + b11 x + c1 x^2 = 0 and the
Jacobian there is diagonal:

    lambda_1 = b11 x + 2 c1 x^2
    lambda_k = 1 + b_k1 x^2 + d_k x      (k = 2, 3, 4)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from config import BISECTION_TOL, ROOT_SCAN_HALF_WIDTH, ROOT_SCAN_POINTS, TIE_REL_TOL
from errors import DegenerateCoefficient, NoRealEquilibria, NotASaddleInS134, SignPatternViolation
from vector_field import CoefficientSet, SubspaceId

logger = logging.getLogger(__name__)


SINK = "sink"
SADDLE = "saddle"
SOURCE = "source"
NONHYPERBOLIC = "nonhyperbolic"

# eigenvalue indices (0-based) tangent to each carrier at a point of L1
SUBSPACE_EIGEN_INDICES = {
    SubspaceId.P12: (0, 1),
    SubspaceId.P13: (0, 2),
    SubspaceId.P14: (0, 3),
    SubspaceId.S134: (0, 2, 3),
    SubspaceId.Full: (0, 1, 2, 3),
}


def classify_point(eigenvalues) -> str:
    ev = np.asarray(eigenvalues, dtype=float)
    if np.any(ev == 0.0):
        return NONHYPERBOLIC
    if np.all(ev < 0.0):
        return SINK
    if np.all(ev > 0.0):
        return SOURCE
    return SADDLE


@dataclass(frozen=True)
class EquilibriumRecord:
    label: str                        # "xi_a" or "xi_b"
    x1_value: float
    eigenvalues: Tuple[float, float, float, float]
    roles: Dict[str, str] = field(default_factory=dict)

    @property
    def point(self) -> np.ndarray:
        return np.array([self.x1_value, 0.0, 0.0, 0.0])

    def role_in(self, sid: SubspaceId) -> str:
        return classify_point([self.eigenvalues[i] for i in SUBSPACE_EIGEN_INDICES[sid]])

    def contracting(self) -> List[float]:
        return [v for v in self.eigenvalues if v < 0.0]

    def expanding(self) -> List[float]:
        return [v for v in self.eigenvalues if v > 0.0]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "x1": self.x1_value,
            "eigenvalues": list(self.eigenvalues),
            "roles": dict(self.roles),
        }


# ------------------------------------------------------------
# ROOTS ON L1
# ------------------------------------------------------------

def l1_roots(coeffs: CoefficientSet) -> Tuple[float, float]:
    """
    Both roots of 1 + b11 x + c1 x^2, smaller first.
    Uses q = -(b11 + sign(b11) sqrt(disc)) / 2, roots q / c1 and 1 / q.
    """
    if coeffs.c1 == 0.0:
        raise DegenerateCoefficient("c1 = 0: the L1 equation is not quadratic")
    disc = coeffs.discriminant
    if disc <= 0.0:
        raise NoRealEquilibria(f"b11^2 - 4 c1 = {disc:g} <= 0")
    sign = 1.0 if coeffs.b11 >= 0.0 else -1.0
    q = -0.5 * (coeffs.b11 + sign * math.sqrt(disc))
    r1, r2 = q / coeffs.c1, 1.0 / q
    return (r1, r2) if r1 <= r2 else (r2, r1)


def l1_eigenvalues(coeffs: CoefficientSet, x: float) -> Tuple[float, float, float, float]:
    c = coeffs
    x2 = x * x
    return (
        c.b11 * x + 2.0 * c.c1 * x2,
        1.0 + c.b21 * x2 + c.d2 * x,
        1.0 + c.b31 * x2 + c.d3 * x,
        1.0 + c.b41 * x2 + c.d4 * x,
    )


def _record(coeffs: CoefficientSet, label: str, x: float) -> EquilibriumRecord:
    ev = l1_eigenvalues(coeffs, x)
    rec = EquilibriumRecord(label=label, x1_value=x, eigenvalues=ev)
    roles = {
        SubspaceId.P12.name: rec.role_in(SubspaceId.P12),
        SubspaceId.S134.name: rec.role_in(SubspaceId.S134),
    }
    return EquilibriumRecord(label=label, x1_value=x, eigenvalues=ev, roles=roles)


def compute_equilibria(coeffs: CoefficientSet) -> Tuple[EquilibriumRecord, EquilibriumRecord]:
    lo, hi = l1_roots(coeffs)
    if not (lo < 0.0 < hi):
        raise SignPatternViolation(
            f"roots {lo:.6g}, {hi:.6g} do not satisfy x_a < 0 < x_b"
        )
    return _record(coeffs, "xi_a", lo), _record(coeffs, "xi_b", hi)


# ------------------------------------------------------------
# PRINCIPAL PLANE AT xi_b
# ------------------------------------------------------------

class PrincipalPlane(Enum):
    P13 = "P13"
    P14 = "P14"
    Tie = "Tie"


def principal_plane(coeffs: CoefficientSet) -> PrincipalPlane:
    """
    Plane of the strongest expanding eigenvalue at xi_b, by direct
    comparison of lambda_3 and lambda_4.
    """
    _, xb = compute_equilibria(coeffs)
    lam3, lam4 = xb.eigenvalues[2], xb.eigenvalues[3]
    if lam3 <= 0.0 or lam4 <= 0.0:
        raise NotASaddleInS134(
            f"lambda_3(xi_b) = {lam3:.6g}, lambda_4(xi_b) = {lam4:.6g}; both must be positive"
        )
    if abs(lam3 - lam4) <= TIE_REL_TOL * max(abs(lam3), abs(lam4)):
        return PrincipalPlane.Tie
    return PrincipalPlane.P13 if lam3 > lam4 else PrincipalPlane.P14


# ------------------------------------------------------------
# OFF-AXIS EQUILIBRIA IN P12
# ------------------------------------------------------------

@dataclass(frozen=True)
class P12Equilibrium:
    x1: float
    x2: float                 # positive branch; (x1, -x2) is its kappa_2 image
    inside_D: Optional[bool]  # None when xi_a / xi_b are unavailable

    def to_dict(self) -> dict:
        return {"x1": self.x1, "x2": self.x2, "inside_D": self.inside_D}


def _p12_branches(coeffs: CoefficientSet):
    c = coeffs

    def cubic(x):
        return -(x + c.b11 * x * x + c.c1 * x ** 3) / c.b12

    def parabola(x):
        return -(1.0 + c.b21 * x * x + c.d2 * x) / c.b22

    return cubic, parabola


def p12_interior_equilibria(
    coeffs: CoefficientSet,
    half_width: float = ROOT_SCAN_HALF_WIDTH,
    n_points: int = ROOT_SCAN_POINTS,
    tol: float = BISECTION_TOL,
) -> List[P12Equilibrium]:
    """
    Equilibria of P12 off the axes: x2^2 equals both the cubic branch
    -(x1 + b11 x1^2 + c1 x1^3)/b12 and the parabola -(1 + b21 x1^2 + d2 x1)/b22.
    Scans the difference of the branches for sign changes and bisects each.
    """
    c = coeffs
    if c.b12 == 0.0 or c.b22 == 0.0:
        raise DegenerateCoefficient("b12 and b22 must be non-zero to solve for x2^2")

    # difference as a polynomial in x1, highest degree first
    poly = np.array([
        -c.c1 / c.b12,
        -c.b11 / c.b12 + c.b21 / c.b22,
        -1.0 / c.b12 + c.d2 / c.b22,
        1.0 / c.b22,
    ])
    scale = max(1.0, float(np.max(np.abs(poly))))
    if np.all(np.abs(poly) <= 1e-14 * scale):
        raise DegenerateCoefficient("the cubic and parabola branches coincide")

    cubic, parabola = _p12_branches(c)

    # one callable for the scan and for bisect, so bracket signs agree
    def diff(x):
        return float(np.polyval(poly, x))

    grid = np.linspace(-half_width, half_width, n_points)
    values = np.array([diff(x) for x in grid])

    roots: List[float] = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = values[i], values[i + 1]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(float(bisect(diff, a, b, xtol=tol)))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))

    if len(roots) > 3:
        raise DegenerateCoefficient(
            f"{len(roots)} sign changes found for a polynomial of degree <= 3; branches are numerically dense"
        )

    try:
        xa, xb = compute_equilibria(c)
        bounds = (xa.x1_value, xb.x1_value)
    except (NoRealEquilibria, SignPatternViolation, DegenerateCoefficient):
        bounds = None

    found = []
    for r in roots:
        x2_sq = 0.5 * (cubic(r) + parabola(r))
        if x2_sq <= 0.0:
            continue
        inside = None if bounds is None else bool(bounds[0] < r < bounds[1])
        found.append(P12Equilibrium(x1=r, x2=math.sqrt(x2_sq), inside_D=inside))

    logger.debug("[Equilibria] P12 off-axis solutions: %s", [f.x1 for f in found])
    return found


# ------------------------------------------------------------
# Z-SET SLICES IN S134
# ------------------------------------------------------------

def z_set_slice(coeffs: CoefficientSet, x1: float) -> Optional[Tuple[float, float]]:
    """
    Semi-axes (along x3, x4) of the ellipse where x1' = 0 in the plane of
    constant x1 inside S134, or None if that slice is empty or not an ellipse.
    """
    c = coeffs
    q = x1 + c.b11 * x1 * x1 + c.c1 * x1 ** 3
    if c.b13 >= 0.0 or c.b14 >= 0.0 or q <= 0.0:
        return None
    return math.sqrt(q / -c.b13), math.sqrt(q / -c.b14)
