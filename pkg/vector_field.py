# vector_field.py
"""
The Z2 x Z2-equivariant polynomial vector field on R^4:

    x1' = x1 + sum_i b1i xi^2 + c1 x1^3
    x2' = x2 + x2 sum_i b2i xi^2 + d2 x1 x2
    x3' = x3 + x3 sum_i b3i xi^2 + c3 x3^2 x4 + d3 x1 x3
    x4' = x4 + x4 sum_i b4i xi^2 + c4 x3 x4^2 + d4 x1 x4

together with its symmetry group, the coordinate subspaces it leaves
invariant, and an analytic Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Dict, Iterable, Sequence

import numpy as np

from coefficient_config import COEFFICIENT_KEYS
from errors import CoefficientFormatError, DomainError


# ------------------------------------------------------------
# COEFFICIENTS
# ------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientSet:
    b11: float
    b12: float
    b13: float
    b14: float
    b21: float
    b22: float
    b23: float
    b24: float
    b31: float
    b32: float
    b33: float
    b34: float
    b41: float
    b42: float
    b43: float
    b44: float
    c1: float
    c3: float
    c4: float
    d2: float
    d3: float
    d4: float

    def __post_init__(self):
        for k in COEFFICIENT_KEYS:
            v = getattr(self, k)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise CoefficientFormatError(f"coefficient {k!r} must be a number, got {v!r}", key=k)
            v = float(v)
            if not math.isfinite(v):
                raise DomainError(f"coefficient {k!r} is not finite: {v!r}")
            object.__setattr__(self, k, v)

    # ---- construction / serialisation ----

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CoefficientSet":
        """
        Strict: every key of COEFFICIENT_KEYS must be present,
        nothing else is allowed.
        """
        if not isinstance(data, dict):
            raise CoefficientFormatError("coefficient file must hold a JSON object")
        unknown = sorted(set(data) - set(COEFFICIENT_KEYS))
        if unknown:
            raise CoefficientFormatError(f"unknown coefficient key {unknown[0]!r}", key=unknown[0])
        for k in COEFFICIENT_KEYS:
            if k not in data:
                raise CoefficientFormatError(f"missing coefficient {k!r}", key=k)
        return cls(**{k: data[k] for k in COEFFICIENT_KEYS})

    def to_dict(self) -> Dict[str, float]:
        d = asdict(self)
        return {k: d[k] for k in COEFFICIENT_KEYS}

    def with_changes(self, **changes: float) -> "CoefficientSet":
        return replace(self, **changes)

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in COEFFICIENT_KEYS], dtype=float)

    @classmethod
    def from_vector(cls, values: Iterable[float]) -> "CoefficientSet":
        return cls(*[float(v) for v in values])

    # ---- derived ----

    @property
    def discriminant(self) -> float:
        return self.b11 * self.b11 - 4.0 * self.c1

    def is_valid(self) -> bool:
        """Equilibrium computations on L1 need b11 != 0 and b11^2 - 4 c1 > 0."""
        return self.b11 != 0.0 and self.discriminant > 0.0


# ------------------------------------------------------------
# STATE
# ------------------------------------------------------------

StateVector = np.ndarray


def as_state(x: Sequence[float]) -> StateVector:
    """
    Coerce to a read-only float64 array of shape (4,).
    Raises DomainError on wrong shape or non-finite entries.
    """
    arr = np.array(x, dtype=float)
    if arr.shape != (4,):
        raise DomainError(f"state must have 4 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"state is not finite: {arr.tolist()}")
    arr.flags.writeable = False
    return arr


# ------------------------------------------------------------
# FIELD + JACOBIAN
# ------------------------------------------------------------

def field_rhs(c: CoefficientSet, y: np.ndarray) -> np.ndarray:
    """Unchecked field evaluation used inside the integrator."""
    x1, x2, x3, x4 = float(y[0]), float(y[1]), float(y[2]), float(y[3])
    q1, q2, q3, q4 = x1 * x1, x2 * x2, x3 * x3, x4 * x4
    f1 = x1 * (1.0 + x1 * (c.b11 + c.c1 * x1)) + c.b12 * q2 + c.b13 * q3 + c.b14 * q4
    f2 = x2 * (1.0 + c.b21 * q1 + c.b22 * q2 + c.b23 * q3 + c.b24 * q4 + c.d2 * x1)
    f3 = x3 * (1.0 + c.b31 * q1 + c.b32 * q2 + c.b33 * q3 + c.b34 * q4 + c.c3 * x3 * x4 + c.d3 * x1)
    f4 = x4 * (1.0 + c.b41 * q1 + c.b42 * q2 + c.b43 * q3 + c.b44 * q4 + c.c4 * x3 * x4 + c.d4 * x1)
    return np.array((f1, f2, f3, f4))


def eval_field(coeffs: CoefficientSet, x: Sequence[float]) -> StateVector:
    return as_state(field_rhs(coeffs, as_state(x)))


def jacobian_matrix(c: CoefficientSet, y: np.ndarray) -> np.ndarray:
    """Unchecked analytic Jacobian."""
    x1, x2, x3, x4 = float(y[0]), float(y[1]), float(y[2]), float(y[3])
    q1, q2, q3, q4 = x1 * x1, x2 * x2, x3 * x3, x4 * x4
    g2 = 1.0 + c.b21 * q1 + c.b22 * q2 + c.b23 * q3 + c.b24 * q4 + c.d2 * x1
    g3 = 1.0 + c.b31 * q1 + c.b32 * q2 + c.b33 * q3 + c.b34 * q4 + c.c3 * x3 * x4 + c.d3 * x1
    g4 = 1.0 + c.b41 * q1 + c.b42 * q2 + c.b43 * q3 + c.b44 * q4 + c.c4 * x3 * x4 + c.d4 * x1

    return np.array([
        [1.0 + x1 * (2.0 * c.b11 + 3.0 * c.c1 * x1), 2.0 * c.b12 * x2, 2.0 * c.b13 * x3, 2.0 * c.b14 * x4],
        [x2 * (2.0 * c.b21 * x1 + c.d2), g2 + 2.0 * c.b22 * q2, 2.0 * c.b23 * x2 * x3, 2.0 * c.b24 * x2 * x4],
        [x3 * (2.0 * c.b31 * x1 + c.d3), 2.0 * c.b32 * x2 * x3, g3 + x3 * (2.0 * c.b33 * x3 + c.c3 * x4),
         x3 * (2.0 * c.b34 * x4 + c.c3 * x3)],
        [x4 * (2.0 * c.b41 * x1 + c.d4), 2.0 * c.b42 * x2 * x4, x4 * (2.0 * c.b43 * x3 + c.c4 * x4),
         g4 + x4 * (2.0 * c.b44 * x4 + c.c4 * x3)],
    ])


def eval_jacobian(coeffs: CoefficientSet, x: Sequence[float]) -> np.ndarray:
    return jacobian_matrix(coeffs, as_state(x))


# ------------------------------------------------------------
# SYMMETRY GROUP  (Z2 x Z2, generated by kappa_2 and kappa_34)
# ------------------------------------------------------------

class SymmetryElement(Enum):
    Id = (1.0, 1.0, 1.0, 1.0)
    Kappa2 = (1.0, -1.0, 1.0, 1.0)
    Kappa34 = (1.0, 1.0, -1.0, -1.0)
    Kappa2Kappa34 = (1.0, -1.0, -1.0, -1.0)

    @property
    def signs(self) -> np.ndarray:
        return np.array(self.value)

    def compose(self, other: "SymmetryElement") -> "SymmetryElement":
        return SymmetryElement(tuple(a * b for a, b in zip(self.value, other.value)))


def apply_symmetry(g: SymmetryElement, x: Sequence[float]) -> StateVector:
    return as_state(g.signs * as_state(x))


# ------------------------------------------------------------
# COORDINATE SUBSPACES
# ------------------------------------------------------------

class SubspaceId(Enum):
    # value = 0-based indices of the coordinates that vanish on the subspace
    L1 = (1, 2, 3)
    L2 = (0, 2, 3)
    L3 = (0, 1, 3)
    L4 = (0, 1, 2)
    P12 = (2, 3)
    P13 = (1, 3)
    P14 = (1, 2)
    P34 = (0, 1)
    S134 = (1,)
    Full = ()

    @property
    def vanishing(self) -> tuple:
        return self.value

    @property
    def free(self) -> tuple:
        return tuple(i for i in range(4) if i not in self.value)


# Subspaces the flow leaves invariant. x1' carries b12 x2^2 + b13 x3^2 + b14 x4^2,
# so any subspace forcing x1 = 0 (L2, L3, L4, P34) is not invariant.
INVARIANT_SUBSPACES = frozenset({
    SubspaceId.L1, SubspaceId.P12, SubspaceId.P13, SubspaceId.P14,
    SubspaceId.S134, SubspaceId.Full,
})


def is_flow_invariant(sid: SubspaceId) -> bool:
    return sid in INVARIANT_SUBSPACES


def subspace_distance(sid: SubspaceId, x: Sequence[float]) -> float:
    arr = np.asarray(x, dtype=float)
    if not sid.vanishing:
        return 0.0
    return float(np.linalg.norm(arr[list(sid.vanishing)]))


def in_subspace(sid: SubspaceId, x: Sequence[float], tol: float = 0.0) -> bool:
    return subspace_distance(sid, x) <= tol


def free_coordinates(x: np.ndarray) -> list:
    """
    Coordinates of the smallest invariant coordinate subspace holding x:
    x1 always, plus each of x2..x4 that is not exactly zero.
    """
    return [0] + [i for i in (1, 2, 3) if x[i] != 0.0]


def restricted_spectrum(c: CoefficientSet, x: np.ndarray) -> np.ndarray:
    """Eigenvalues of the Jacobian restricted to that smallest invariant subspace."""
    idx = free_coordinates(x)
    J = jacobian_matrix(c, x)
    return np.linalg.eigvals(J[np.ix_(idx, idx)])
