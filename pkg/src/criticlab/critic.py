"""Four-weight quadratic critic and its derivatives.

The critic is a time-indexed quadratic in the scalar state:

    V(x, t, w) = -c1*x**2 + w1*x + w3   at t = 1
                 -c2*x**2 + w2*x + w4   at t = 2
                 0                      at t in {0, 3}

Its state gradient is G(x, t, w) = -2*c_t*x + w_t for t in {1, 2} and 0
otherwise, so dG/dw_t is exactly 1 in slot t and w3, w4 never influence the
gradient.  The weight pair (w1, w2) can be reparametrised through a fixed
full-rank 2x2 matrix F as (w1, w2) = F @ p, which is what turns the
gradient-learning update into a two-variable linear dynamic system.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .env import ProblemConstants

_SINGULAR_DET = 1e-12


@dataclass(frozen=True)
class CriticWeights:
    w1: float
    w2: float
    w3: float = 0.0
    w4: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3, self.w4], dtype=float)

    @classmethod
    def from_array(cls, w) -> "CriticWeights":
        w1, w2, w3, w4 = (float(v) for v in w)
        return cls(w1, w2, w3, w4)


def _check_critic_time(t: int) -> None:
    if t not in (0, 1, 2, 3):
        raise ValueError(f"critic time index must be in 0..3, got {t}")


def critic_value(x: float, t: int, weights: CriticWeights, consts: ProblemConstants) -> float:
    _check_critic_time(t)
    if t == 1:
        return -consts.c1 * x * x + weights.w1 * x + weights.w3
    if t == 2:
        return -consts.c2 * x * x + weights.w2 * x + weights.w4
    return 0.0


def critic_gradient(x: float, t: int, weights: CriticWeights, consts: ProblemConstants) -> float:
    """dV/dx: -2*c_t*x + w_t for t in {1, 2}, else 0."""
    _check_critic_time(t)
    if t == 1:
        return -2.0 * consts.c1 * x + weights.w1
    if t == 2:
        return -2.0 * consts.c2 * x + weights.w2
    return 0.0


def critic_weight_jacobians(x: float, t: int) -> tuple[np.ndarray, np.ndarray]:
    """(dV/dw, dG/dw) as 4-vectors.

    dV/dw = (x, 0, 1, 0) at t = 1, (0, x, 0, 1) at t = 2, zeros otherwise.
    dG/dw has a single 1 in slot t for t in {1, 2}, zeros otherwise.
    """
    _check_critic_time(t)
    dv = np.zeros(4)
    dg = np.zeros(4)
    if t == 1:
        dv[0] = x
        dv[2] = 1.0
        dg[0] = 1.0
    elif t == 2:
        dv[1] = x
        dv[3] = 1.0
        dg[1] = 1.0
    return dv, dg


def apply_reparam(F, p, w34=(0.0, 0.0)) -> CriticWeights:
    """Map reparametrised weights p through (w1, w2) = F @ p.

    w3, w4 are carried unchanged (they default to zero).  Warns when F is
    numerically singular; the convergence argument for the curvature-weighted
    learner needs F full rank.
    """
    F = np.asarray(F, dtype=float)
    p = np.asarray(p, dtype=float)
    if F.shape != (2, 2) or p.shape != (2,):
        raise ValueError(f"expected 2x2 F and length-2 p, got {F.shape} and {p.shape}")
    det = F[0, 0] * F[1, 1] - F[0, 1] * F[1, 0]
    if abs(det) < _SINGULAR_DET:
        warnings.warn(
            f"reparametrisation matrix is numerically singular (|det| = {abs(det):.3e})",
            stacklevel=2,
        )
    w12 = F @ p
    return CriticWeights(float(w12[0]), float(w12[1]), float(w34[0]), float(w34[1]))


@dataclass(frozen=True)
class Reparametrization:
    """A fixed 2x2 matrix F together with the current p vector."""

    F: tuple[tuple[float, float], tuple[float, float]]
    p: tuple[float, float]

    def matrix(self) -> np.ndarray:
        return np.array(self.F, dtype=float)

    def to_weights(self, w34=(0.0, 0.0)) -> CriticWeights:
        return apply_reparam(self.matrix(), np.array(self.p), w34)

    def pull_back(self, dw12) -> np.ndarray:
        """Map a (dw1, dw2) update direction into p space: dp = F.T @ dw12."""
        return self.matrix().T @ np.asarray(dw12, dtype=float)
