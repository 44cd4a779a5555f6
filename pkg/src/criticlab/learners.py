"""Batch critic-learning updates over a complete trajectory.

All updates are forward-view batch rules computed from a finished rollout;
no eligibility traces.  Targets are backward recursions that are zero at
the terminal step:

    value targets     V'_t = r_t + gamma*(lam*V'_{t+1} + (1-lam)*V_{t+1})
    action targets    Q'_t = r_t + gamma*(lam*Q'_{t+1} + (1-lam)*Q_{t+1})
    gradient targets  G'_t = Dr/Dx|_t + gamma * Df/Dx|_t * (lam*G'_{t+1} + (1-lam)*G_{t+1})

where D/Dx is the total derivative along the policy,
D/Dx = d/dx + (da/dx) * d/da, composed here from the model Jacobians and
the analytic greedy action's state derivative.  The weight updates are

    td     dw = alpha * sum_t (dV/dw)_t * (V'_t - V_t)
    sarsa  dw = alpha * sum_t (dQ/dw)_t * (Q'_t - Q_t)
    vgl    dw = alpha * sum_t (dG/dw)_t * Omega_t * (G'_t - G_t)

with Omega either identically 1 or the inverse action-curvature weighting
Omega_t = 1/(2*(c_t + k)) for t in {1, 2} (0 at t = 0).  The classic ADP
algorithms are aliases: HDP is the TD(0) rule, DHP the VGL(0) rule with
identity weighting, and GDHP mixes the two.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .critic import CriticWeights, critic_gradient, critic_value, critic_weight_jacobians
from .env import ProblemConstants, Trajectory, model_jacobians
from .policy import greedy_action, greedy_action_dx, q_value


class Algorithm(enum.Enum):
    TD = "td"
    SARSA = "sarsa"
    VGL = "vgl"
    VGL_OMEGA = "vgl-omega"
    HDP = "hdp"
    DHP = "dhp"
    GDHP = "gdhp"


class OmegaMode(enum.Enum):
    IDENTITY = "identity"
    CURVATURE = "curvature"


# ADP aliases are fixed at lam = 0 by definition.
_LAMBDA_ZERO_ALIASES = (Algorithm.HDP, Algorithm.DHP, Algorithm.GDHP)


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: Algorithm
    lam: float
    alpha: float
    gamma: float = 1.0
    gdhp_mix: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.gdhp_mix <= 1.0:
            raise ValueError(f"gdhp_mix must lie in [0, 1], got {self.gdhp_mix}")
        if self.algorithm in _LAMBDA_ZERO_ALIASES and self.lam != 0.0:
            raise ValueError(f"{self.algorithm.value} is a lam=0 rule, got lam={self.lam}")


def lambda_return_targets(
    traj: Trajectory, weights: CriticWeights, consts: ProblemConstants, config: LearnerConfig
) -> np.ndarray:
    """Mixed multi-step value targets V'_0..V'_3 (terminal entry is 0)."""
    lam, gamma = config.lam, config.gamma
    xs = traj.states
    v_targets = np.zeros(4)
    for t in (2, 1, 0):
        v_next = critic_value(xs[t + 1], t + 1, weights, consts)
        v_targets[t] = traj.steps[t].r + gamma * (
            lam * v_targets[t + 1] + (1.0 - lam) * v_next
        )
    return v_targets


def q_lambda_targets(
    traj: Trajectory, weights: CriticWeights, consts: ProblemConstants, config: LearnerConfig
) -> np.ndarray:
    """Action-value targets Q'_0..Q'_3 (terminal entry is 0).

    The Q function here is the composite r + gamma*V(f(.)) over the critic,
    and the terminal Q is 0 by the same convention as the terminal V.
    """
    lam, gamma = config.lam, config.gamma
    q_targets = np.zeros(4)
    for t in (2, 1, 0):
        if t == 2:
            q_next = 0.0
        else:
            step = traj.steps[t + 1]
            q_next = q_value(step.x, t + 1, step.a, weights, consts)
        q_targets[t] = traj.steps[t].r + gamma * (
            lam * q_targets[t + 1] + (1.0 - lam) * q_next
        )
    return q_targets


def _total_derivatives(
    traj: Trajectory, consts: ProblemConstants, t: int
) -> tuple[float, float]:
    """(Df/Dx, Dr/Dx) at step t along the greedy trajectory."""
    step = traj.steps[t]
    jac = model_jacobians(step.x, t, step.a, consts)
    da_dx = greedy_action_dx(t, consts)
    df = jac.df_dx + da_dx * jac.df_da
    dr = jac.dr_dx + da_dx * jac.dr_da
    return df, dr


def _require_greedy_trajectory(
    traj: Trajectory, weights: CriticWeights, consts: ProblemConstants
) -> None:
    # The D/Dx chain rule below bakes in the greedy policy's state
    # derivative, so exploration noise or an off-policy actor would make
    # the targets silently wrong.
    for t in (0, 1):
        step = traj.steps[t]
        want = greedy_action(step.x, t, weights, consts)
        if abs(step.a - want) > 1e-7 + 1e-6 * abs(want):
            raise ValueError(
                "gradient targets need a trajectory from the analytic greedy "
                f"policy; action at t={t} deviates from greedy by "
                f"{abs(step.a - want):.3e}"
            )


def value_gradient_targets(
    traj: Trajectory, weights: CriticWeights, consts: ProblemConstants, config: LearnerConfig
) -> np.ndarray:
    """Gradient targets G'_0..G'_3 (terminal entry is 0).

    Only defined along trajectories from the analytic greedy policy, whose
    state derivative enters the total derivatives D/Dx; anything else is
    rejected.
    """
    _require_greedy_trajectory(traj, weights, consts)
    lam, gamma = config.lam, config.gamma
    xs = traj.states
    g_targets = np.zeros(4)
    for t in (2, 1, 0):
        df, dr = _total_derivatives(traj, consts, t)
        g_next = critic_gradient(xs[t + 1], t + 1, weights, consts)
        g_targets[t] = dr + gamma * df * (lam * g_targets[t + 1] + (1.0 - lam) * g_next)
    return g_targets


def td_update(
    traj: Trajectory, weights: CriticWeights, consts: ProblemConstants, config: LearnerConfig
) -> np.ndarray:
    """dw = alpha * sum_t (dV/dw)_t (V'_t - V_t), as a 4-vector."""
    v_targets = lambda_return_targets(traj, weights, consts, config)
    delta = np.zeros(4)
    for t in range(3):
        x = traj.steps[t].x
        dv_dw, _ = critic_weight_jacobians(x, t)
        err = v_targets[t] - critic_value(x, t, weights, consts)
        delta += dv_dw * err
    return config.alpha * delta


def sarsa_update(
    traj: Trajectory, weights: CriticWeights, consts: ProblemConstants, config: LearnerConfig
) -> np.ndarray:
    """dw = alpha * sum_t (dQ/dw)_t (Q'_t - Q_t), as a 4-vector.

    Q is the composite critic-through-model function, so its weight
    gradient at step t is gamma * dV/dw evaluated at the next state.
    """
    q_targets = q_lambda_targets(traj, weights, consts, config)
    xs = traj.states
    delta = np.zeros(4)
    for t in range(3):
        step = traj.steps[t]
        dq_dw = config.gamma * critic_weight_jacobians(xs[t + 1], t + 1)[0]
        err = q_targets[t] - q_value(step.x, t, step.a, weights, consts)
        delta += dq_dw * err
    return config.alpha * delta


def omega_weight(t: int, consts: ProblemConstants, mode: OmegaMode) -> float:
    """Scalar gradient-error weighting at step t."""
    if mode is OmegaMode.IDENTITY:
        return 1.0
    if t == 0:
        return 0.0
    c_t = consts.c1 if t == 1 else consts.c2
    curvature = 2.0 * (c_t + consts.k)
    if curvature <= 0.0:
        raise ValueError(
            f"curvature weighting undefined at t={t}: action curvature {curvature}"
        )
    return 1.0 / curvature


def vgl_update(
    traj: Trajectory,
    weights: CriticWeights,
    consts: ProblemConstants,
    config: LearnerConfig,
    omega_mode: OmegaMode = OmegaMode.IDENTITY,
) -> np.ndarray:
    """dw = alpha * sum_t (dG/dw)_t Omega_t (G'_t - G_t), as a 4-vector.

    Only w1 and w2 ever move: dG/dw picks out slot t, and slots 3, 4 have
    zero gradient everywhere.
    """
    g_targets = value_gradient_targets(traj, weights, consts, config)
    xs = traj.states
    delta = np.zeros(4)
    for t in (1, 2):
        _, dg_dw = critic_weight_jacobians(xs[t], t)
        om = omega_weight(t, consts, omega_mode)
        err = g_targets[t] - critic_gradient(xs[t], t, weights, consts)
        delta += dg_dw * (om * err)
    return config.alpha * delta


def gdhp_update(
    traj: Trajectory,
    weights: CriticWeights,
    consts: ProblemConstants,
    config: LearnerConfig,
    mix: float | None = None,
) -> np.ndarray:
    """mix * (VGL(0) update) + (1 - mix) * (TD(0) update)."""
    if mix is None:
        mix = config.gdhp_mix
    if not 0.0 <= mix <= 1.0:
        raise ValueError(f"mix must lie in [0, 1], got {mix}")
    zero_lam = LearnerConfig(
        algorithm=Algorithm.TD, lam=0.0, alpha=config.alpha, gamma=config.gamma
    )
    return mix * vgl_update(traj, weights, consts, zero_lam, OmegaMode.IDENTITY) + (
        1.0 - mix
    ) * td_update(traj, weights, consts, zero_lam)


def learner_update(
    traj: Trajectory, weights: CriticWeights, consts: ProblemConstants, config: LearnerConfig
) -> np.ndarray:
    """Dispatch on the configured algorithm, resolving the ADP aliases."""
    alg = config.algorithm
    if alg in (Algorithm.TD, Algorithm.HDP):
        return td_update(traj, weights, consts, config)
    if alg is Algorithm.SARSA:
        return sarsa_update(traj, weights, consts, config)
    if alg in (Algorithm.VGL, Algorithm.DHP):
        return vgl_update(traj, weights, consts, config, OmegaMode.IDENTITY)
    if alg is Algorithm.VGL_OMEGA:
        return vgl_update(traj, weights, consts, config, OmegaMode.CURVATURE)
    if alg is Algorithm.GDHP:
        return gdhp_update(traj, weights, consts, config)
    raise ValueError(f"unknown algorithm {alg!r}")
