"""Analytic stability of the gradient-learning weight dynamics.

On the three-step benchmark with undiscounted returns, one greedy rollout
plus a VGL-style update moves the shortened weight vector (w1, w2) by
``alpha * M @ (w1, w2)`` where M is a 2x2 matrix depending only on the
constants (c1, c2, k, lam).  After reparametrising (w1, w2) = F @ p the
p dynamics become ``dp = alpha * (F.T @ M @ F) @ p`` (with an extra diagonal
weighting D inserted for the curvature-weighted learner), so for small
enough alpha the learning process converges iff every eigenvalue of the
transformed matrix has negative real part.

The module assembles these matrices in closed form, solves the 2x2
eigenvalue problem from trace and determinant, classifies the verdict, and
(when stable) reports the largest learning rate for which the discrete
iteration p <- (I + alpha*M) p is still a contraction.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from .env import ProblemConstants
from .learners import OmegaMode

MARGINAL_TOL = 1e-12
_FACTORIZATION_TOL = 1e-12


class Verdict(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


def _require_undiscounted(consts: ProblemConstants) -> None:
    # The closed-form update matrix is derived for gamma = 1.
    if consts.gamma != 1.0:
        raise ValueError(
            f"the analytic update matrix assumes gamma = 1, got {consts.gamma}"
        )


def vgl_update_matrix(consts: ProblemConstants) -> np.ndarray:
    """The 2x2 matrix M with per-rollout update d(w1, w2) = alpha * M @ (w1, w2).

    Row i is the (w1, w2) dependence of the gradient error G'_i - G_i along
    the greedy rollout from x0 = 0.
    """
    _require_undiscounted(consts)
    c1, c2, k, lam = consts.c1, consts.c2, consts.k, consts.lam
    s1 = c1 + k
    s2 = c2 + k
    m11 = -k * (k * lam + c2 * c2 + k * (1.0 - lam) * c2) / (s1 * s2 * s2) - k / s1
    m12 = k * (c2 + k - lam * (k + 1.0)) / (s2 * s2)
    m21 = k * (c2 - 1.0) / (s2 * s1)
    m22 = (-1.0 - k) / s2
    return np.array([[m11, m12], [m21, m22]])


def curvature_weighting(consts: ProblemConstants) -> np.ndarray:
    """Diagonal weighting diag(1/(2*(c1+k)), 1/(2*(c2+k))).

    These are the per-step scalar values of the inverse action-curvature
    weighting for t = 1 and t = 2, in weight-slot order.
    """
    return np.diag([1.0 / (2.0 * (consts.c1 + consts.k)), 1.0 / (2.0 * (consts.c2 + consts.k))])


def curvature_factorization(consts: ProblemConstants) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(D, E, B) with M(lam=1) = 2 @ E @ B @ E @ D, B symmetric.

    D is the curvature weighting, E = diag(1/(c2+k), 1) and

        B = [[-k*(k + c2**2 + (c2+k)**2),  k*(c2-1)],
             [ k*(c2-1),                  -1 - k   ]]

    B has negative trace and determinant k*(k+2)*(k+c2)**2 > 0, hence two
    negative real eigenvalues; this is what makes the curvature-weighted
    lam=1 learner provably convergent for any full-rank F.  The identity is
    verified numerically on every call and a failure raises, so a wrong
    constant cannot ship.
    """
    c2, k = consts.c2, consts.k
    s2 = c2 + k
    d_mat = curvature_weighting(consts)
    e_mat = np.diag([1.0 / s2, 1.0])
    b_mat = np.array(
        [
            [-k * (k + c2 * c2 + s2 * s2), k * (c2 - 1.0)],
            [k * (c2 - 1.0), -1.0 - k],
        ]
    )
    lam1 = ProblemConstants(consts.c1, consts.c2, consts.k, gamma=1.0, lam=1.0)
    m_lam1 = vgl_update_matrix(lam1)
    reconstructed = 2.0 * e_mat @ b_mat @ e_mat @ d_mat
    scale = max(np.max(np.abs(m_lam1)), 1e-300)
    if np.max(np.abs(reconstructed - m_lam1)) > _FACTORIZATION_TOL * scale:
        raise RuntimeError(
            "factorization identity 2*E@B@E@D != M(lam=1); "
            f"max deviation {np.max(np.abs(reconstructed - m_lam1)):.3e}"
        )
    return d_mat, e_mat, b_mat


def reparam_transform(F, M, D=None) -> np.ndarray:
    """F.T @ M @ F, or F.T @ D @ M @ F when a weighting D is supplied."""
    F = np.asarray(F, dtype=float)
    M = np.asarray(M, dtype=float)
    if D is None:
        return F.T @ M @ F
    return F.T @ np.asarray(D, dtype=float) @ M @ F


def eigenvalues_2x2(M) -> tuple[complex, complex]:
    """Roots of mu**2 - tr(M)*mu + det(M), in closed form."""
    M = np.asarray(M, dtype=float)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    half = 0.5 * tr
    disc = half * half - det
    if disc >= 0.0:
        root = math.sqrt(disc)
        return complex(half - root, 0.0), complex(half + root, 0.0)
    root = math.sqrt(-disc)
    return complex(half, -root), complex(half, root)


def verdict_for(eigenvalues) -> Verdict:
    """Sign classification of the largest eigenvalue real part.

    Unstable above +MARGINAL_TOL, stable below -MARGINAL_TOL, marginal in
    the band between.
    """
    max_real = max(mu.real for mu in eigenvalues)
    if max_real > MARGINAL_TOL:
        return Verdict.UNSTABLE
    if max_real < -MARGINAL_TOL:
        return Verdict.STABLE
    return Verdict.MARGINAL


def max_stable_alpha(eigenvalues) -> float:
    """Largest alpha with spectral radius of I + alpha*M below 1.

    For an eigenvalue mu = a + bi with a < 0, |1 + alpha*mu| < 1 iff
    alpha < -2a/|mu|**2; the bound is the minimum over the eigenvalues.
    """
    bounds = []
    for mu in eigenvalues:
        a = mu.real
        mag2 = abs(mu) ** 2
        if a >= 0.0 or mag2 == 0.0:
            raise ValueError(f"no contraction bound for eigenvalue {mu}")
        bounds.append(-2.0 * a / mag2)
    return min(bounds)


@dataclass(frozen=True)
class StabilityReport:
    """Assembled matrices, spectrum and verdict for one configuration."""

    update_matrix: np.ndarray
    weighting: np.ndarray | None
    p_matrix: np.ndarray
    eigenvalues: tuple[complex, complex]
    verdict: Verdict
    alpha_bound: float | None

    def to_dict(self) -> dict:
        rec = {
            "update_matrix": self.update_matrix.tolist(),
            "weighting": None if self.weighting is None else self.weighting.tolist(),
            "p_matrix": self.p_matrix.tolist(),
            "eigenvalues": [[mu.real, mu.imag] for mu in self.eigenvalues],
            "verdict": self.verdict.value,
            "alpha_bound": self.alpha_bound,
        }
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def __str__(self) -> str:
        def fmt_matrix(name, m):
            return (
                f"{name} = [[{m[0, 0]: .10g}, {m[0, 1]: .10g}],\n"
                f"{' ' * (len(name) + 4)}[{m[1, 0]: .10g}, {m[1, 1]: .10g}]]"
            )

        lines = [fmt_matrix("update matrix", self.update_matrix)]
        if self.weighting is not None:
            lines.append(fmt_matrix("weighting", self.weighting))
        lines.append(fmt_matrix("p-space matrix", self.p_matrix))
        mus = ", ".join(f"{mu.real:.6g} {mu.imag:+.6g}i" for mu in self.eigenvalues)
        lines.append(f"eigenvalues: {mus}")
        lines.append(f"verdict: {self.verdict.value}")
        if self.alpha_bound is not None:
            lines.append(f"largest provably convergent alpha: {self.alpha_bound:.6g}")
        return "\n".join(lines)


def classify(consts: ProblemConstants, F, omega_mode: OmegaMode = OmegaMode.IDENTITY) -> StabilityReport:
    """Assemble the p-space dynamics for (consts, F) and classify stability.

    The verdict is unstable/stable when the largest eigenvalue real part is
    above/below +-MARGINAL_TOL, marginal in between.  Stable reports carry
    the discrete-iteration learning-rate bound.
    """
    m = vgl_update_matrix(consts)
    d = curvature_weighting(consts) if omega_mode is OmegaMode.CURVATURE else None
    p_mat = reparam_transform(F, m, d)
    eigs = eigenvalues_2x2(p_mat)
    verdict = verdict_for(eigs)
    bound = max_stable_alpha(eigs) if verdict is Verdict.STABLE else None
    return StabilityReport(
        update_matrix=m,
        weighting=d,
        p_matrix=p_mat,
        eigenvalues=eigs,
        verdict=verdict,
        alpha_bound=bound,
    )
