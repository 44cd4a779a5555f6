"""Policies over the three-step benchmark and trajectory unrolling.

The greedy policy maximises Q(x, t, a, w) = r(x, t, a) + gamma*V(f(x, t, a), t+1, w).
Because Q is a concave quadratic in the action, the argmax has the closed
form

    a_t = (w_{t+1} - 2*c_{t+1}*x) / (2*(c_{t+1} + k))    for t in {0, 1}

and the action at t = 2 is irrelevant (we return 0).  A golden-section
argmax over a configurable bracket is provided as an independent numeric
oracle, plus a noisy-greedy policy (additive Gaussian exploration noise on
each controllable action) and a two-weight fixed actor whose outputs are
its weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

from .critic import CriticWeights, critic_value
from .env import ProblemConstants, Step, Trajectory, model_step, reward_step
from .rng import GaussianSampler

_INVPHI = 0.6180339887498949  # 1/golden ratio


def q_value(x: float, t: int, a: float, weights: CriticWeights, consts: ProblemConstants) -> float:
    """Action value r(x, t, a) + gamma * V(next state, t+1)."""
    r = reward_step(x, t, a, consts)
    x_next = model_step(x, t, a)
    return r + consts.gamma * critic_value(x_next, t + 1, weights, consts)


def greedy_action(x: float, t: int, weights: CriticWeights, consts: ProblemConstants) -> float:
    """Closed-form argmax of Q in the action.

    Raises if the quadratic is not strictly concave (c_{t+1} + k <= 0),
    which cannot happen for validated constants but documents the condition
    the closed form relies on.
    """
    if t == 2:
        return 0.0
    if t not in (0, 1):
        raise ValueError(f"greedy action defined for t in 0..2, got {t}")
    c_next = consts.c1 if t == 0 else consts.c2
    curvature = c_next + consts.k
    if curvature <= 0.0:
        raise ValueError(
            f"action value is not strictly concave at t={t}: c+k = {curvature}"
        )
    w_next = weights.w1 if t == 0 else weights.w2
    return (w_next - 2.0 * c_next * x) / (2.0 * curvature)


def greedy_action_dx(t: int, consts: ProblemConstants) -> float:
    """State derivative of the greedy action: -c_{t+1}/(c_{t+1}+k) for t in {0, 1}."""
    if t == 2:
        return 0.0
    if t not in (0, 1):
        raise ValueError(f"greedy action defined for t in 0..2, got {t}")
    c_next = consts.c1 if t == 0 else consts.c2
    return -c_next / (c_next + consts.k)


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Argmax of a unimodal f on [lo, hi] by golden-section search."""
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def greedy_action_numeric(
    x: float,
    t: int,
    weights: CriticWeights,
    consts: ProblemConstants,
    bracket: tuple[float, float] = (-10.0, 10.0),
    tol: float = 1e-9,
) -> float:
    """Numeric argmax oracle for the greedy action (golden-section on Q)."""
    if t == 2:
        return 0.0
    return golden_section_max(
        lambda a: q_value(x, t, a, weights, consts), bracket[0], bracket[1], tol
    )


@dataclass(frozen=True)
class GreedyAnalytic:
    """Pure greedy policy via the closed-form argmax."""

    def action(self, x, t, weights, consts):
        return greedy_action(x, t, weights, consts)


@dataclass(frozen=True)
class GreedyNumeric:
    """Greedy policy through the golden-section oracle."""

    bracket: tuple[float, float] = (-10.0, 10.0)
    tol: float = 1e-9

    def action(self, x, t, weights, consts):
        return greedy_action_numeric(x, t, weights, consts, self.bracket, self.tol)


@dataclass
class NoisyGreedy:
    """Greedy action plus zero-mean Gaussian noise on every controllable action.

    Noise is resampled independently per action.  Each instance owns its
    generator, so a run is reproducible from (seed) alone; with zero
    variance the policy is exactly the analytic greedy policy and consumes
    no random numbers.
    """

    noise_variance: float
    seed: int = 1
    _sampler: GaussianSampler = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.noise_variance < 0.0:
            raise ValueError(f"noise variance must be >= 0, got {self.noise_variance}")
        self._sampler = GaussianSampler(self.seed)

    def action(self, x, t, weights, consts):
        a = greedy_action(x, t, weights, consts)
        if self.noise_variance == 0.0 or t == 2:
            return a
        return a + math.sqrt(self.noise_variance) * self._sampler.normal()


@dataclass(frozen=True)
class FixedActor:
    """Two-weight actor whose outputs are the weights themselves."""

    z0: float
    z1: float

    def action(self, x, t, weights, consts):
        if t == 0:
            return self.z0
        if t == 1:
            return self.z1
        return 0.0


Policy = Union[GreedyAnalytic, GreedyNumeric, NoisyGreedy, FixedActor]


def unroll(
    x0: float, policy: Policy, weights: CriticWeights, consts: ProblemConstants
) -> Trajectory:
    """Roll the policy out from x0 and record states, actions and rewards."""
    x = float(x0)
    steps = []
    total = 0.0
    for t in range(3):
        a = policy.action(x, t, weights, consts)
        r = reward_step(x, t, a, consts)
        steps.append(Step(t=t, x=x, a=a, r=r))
        total += consts.gamma**t * r
        x = model_step(x, t, a)
    return Trajectory(steps=tuple(steps), final_x=x, total_reward=total)
