"""Three-step benchmark environment.

A scalar-state, scalar-action episodic problem with horizon 3.  The state
advances by ``x + a`` on the first two steps and is frozen on the last one,
so the whole episode is parametrised by ``(x0, a0, a1)``:

    f(x, t, a) = x + a          for t in {0, 1}
                 x              for t = 2
    r(x, t, a) = -k * a**2      for t in {0, 1}
                 -x**2          for t = 2

with ``k > 0``.  The episode terminates at t = 3 after exactly three
rewards.  Starting from x0 = 0 the optimal actions are a0 = a1 = 0, and the
undiscounted total reward is ``-k*(a0**2 + a1**2) - (x0 + a0 + a1)**2``.

Everything in this module is a pure function over immutable values; time is
carried as an explicit integer next to the scalar state, which keeps every
Jacobian a plain float.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Protocol

HORIZON = 3


@dataclass(frozen=True)
class ProblemConstants:
    """Constants defining the benchmark and the critic shape.

    c1, c2 are the (positive) critic curvatures at t = 1 and t = 2, k is
    the action-cost coefficient, gamma the discount factor and lam the
    return-mixing parameter used by the learners and the stability
    analysis.
    """

    c1: float
    c2: float
    k: float
    gamma: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        if not (self.c1 > 0.0 and self.c2 > 0.0 and self.k > 0.0):
            raise ValueError(
                f"c1, c2, k must be positive, got ({self.c1}, {self.c2}, {self.k})"
            )
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")


@dataclass(frozen=True)
class Step:
    """One transition record: time index, state, action taken, reward received."""

    t: int
    x: float
    a: float
    r: float


@dataclass(frozen=True)
class Trajectory:
    """A complete three-step rollout.

    ``steps`` holds the three non-terminal transitions; ``final_x`` is the
    terminal state x3 (always equal to x2 because the last transition is the
    identity map).  ``total_reward`` is sum_t gamma**t * r_t.
    """

    steps: tuple[Step, Step, Step]
    final_x: float
    total_reward: float

    @property
    def states(self) -> tuple[float, float, float, float]:
        """(x0, x1, x2, x3)."""
        return (self.steps[0].x, self.steps[1].x, self.steps[2].x, self.final_x)

    @property
    def actions(self) -> tuple[float, float, float]:
        return tuple(s.a for s in self.steps)

    @property
    def rewards(self) -> tuple[float, float, float]:
        return tuple(s.r for s in self.steps)


class ModelJacobians(NamedTuple):
    df_dx: float
    df_da: float
    dr_dx: float
    dr_da: float


def _check_step_time(t: int) -> None:
    if t not in (0, 1, 2):
        raise ValueError(f"step time index must be 0, 1 or 2, got {t}")


def model_step(x: float, t: int, a: float) -> float:
    """Next state: x + a for t in {0, 1}; x (action has no effect) at t = 2."""
    _check_step_time(t)
    if t == 2:
        return x
    return x + a


def reward_step(x: float, t: int, a: float, consts: ProblemConstants) -> float:
    """Immediate reward: -k*a**2 for t in {0, 1}; -x**2 at t = 2."""
    _check_step_time(t)
    if t == 2:
        return -x * x
    return -consts.k * a * a


def model_jacobians(x: float, t: int, a: float, consts: ProblemConstants) -> ModelJacobians:
    """Partial derivatives of model_step and reward_step at (x, t, a).

    df/dx = 1 for all t; df/da = 1 for t in {0, 1} and 0 at t = 2;
    dr/dx = 0 for t in {0, 1} and -2x at t = 2; dr/da = -2*k*a for
    t in {0, 1} and 0 at t = 2.
    """
    _check_step_time(t)
    if t == 2:
        return ModelJacobians(df_dx=1.0, df_da=0.0, dr_dx=-2.0 * x, dr_da=0.0)
    return ModelJacobians(df_dx=1.0, df_da=1.0, dr_dx=0.0, dr_da=-2.0 * consts.k * a)


class Environment(Protocol):
    """Generic deterministic episodic environment with analytic Jacobians.

    Learners are written against trajectories plus this interface; the
    three-step benchmark is the only shipped instance.
    """

    @property
    def horizon(self) -> int: ...

    def model(self, x: float, t: int, a: float) -> float: ...

    def reward(self, x: float, t: int, a: float) -> float: ...

    def jacobians(self, x: float, t: int, a: float) -> ModelJacobians: ...

    def is_terminal(self, t: int) -> bool: ...


@dataclass(frozen=True)
class ThreeStepEnv:
    """The benchmark environment bound to a set of constants."""

    consts: ProblemConstants

    @property
    def horizon(self) -> int:
        return HORIZON

    def model(self, x: float, t: int, a: float) -> float:
        return model_step(x, t, a)

    def reward(self, x: float, t: int, a: float) -> float:
        return reward_step(x, t, a, self.consts)

    def jacobians(self, x: float, t: int, a: float) -> ModelJacobians:
        return model_jacobians(x, t, a, self.consts)

    def is_terminal(self, t: int) -> bool:
        return t >= HORIZON
