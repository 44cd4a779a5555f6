import math

import numpy as np
import pytest

from criticlab import (
    CriticWeights,
    FixedActor,
    GreedyAnalytic,
    GreedyNumeric,
    NoisyGreedy,
    ProblemConstants,
    golden_section_max,
    greedy_action,
    greedy_action_dx,
    greedy_action_numeric,
    q_value,
    unroll,
)

from conftest import central_diff, random_consts


def test_greedy_action_examples():
    c = ProblemConstants(c1=0.01, c2=0.01, k=0.01)
    assert greedy_action(0.0, 0, CriticWeights(0.02, 0.0), c) == pytest.approx(0.5, abs=1e-15)
    assert greedy_action(0.0, 0, CriticWeights(0.0, 0.0), c) == 0.0
    assert greedy_action(0.0, 1, CriticWeights(0.0, 0.0), c) == 0.0
    assert greedy_action(3.7, 2, CriticWeights(5.0, 5.0), c) == 0.0


def test_greedy_action_time_errors():
    c = ProblemConstants(c1=0.01, c2=0.01, k=0.01)
    with pytest.raises(ValueError):
        greedy_action(0.0, 3, CriticWeights(0, 0), c)
    with pytest.raises(ValueError):
        greedy_action_dx(5, c)


def test_greedy_action_rejects_nonconcave():
    # Bypass the constants validation to exercise the concavity guard.
    c = ProblemConstants(c1=0.01, c2=0.01, k=0.01)
    object.__setattr__(c, "k", -0.5)
    with pytest.raises(ValueError, match="concave"):
        greedy_action(0.0, 0, CriticWeights(1.0, 1.0), c)


def test_q_value_examples():
    c = ProblemConstants(c1=0.01, c2=0.01, k=0.01, gamma=1.0)
    assert q_value(0.0, 0, 0.0, CriticWeights(0, 0), c) == 0.0
    got = q_value(0.0, 0, 0.5, CriticWeights(0.02, 0.0), c)
    assert got == pytest.approx(0.005, abs=1e-15)


def test_greedy_is_stationary_point_of_q():
    rng = np.random.default_rng(21)
    for _ in range(200):
        c = random_consts(rng)
        w = CriticWeights.from_array(rng.uniform(-0.5, 0.5, 4))
        x = float(rng.uniform(-1, 1))
        t = int(rng.integers(0, 2))
        a_star = greedy_action(x, t, w, c)
        dq = central_diff(lambda a: q_value(x, t, a, w, c), a_star)
        assert abs(dq) < 1e-8


def test_analytic_matches_numeric_oracle():
    # Draw targets first so the true argmax stays inside the search bracket.
    rng = np.random.default_rng(22)
    for _ in range(1000):
        c = ProblemConstants(
            c1=float(rng.uniform(0.001, 1.0)),
            c2=float(rng.uniform(0.001, 1.0)),
            k=float(rng.uniform(0.001, 1.0)),
        )
        t = int(rng.integers(0, 2))
        x = float(rng.uniform(-1, 1))
        a_target = float(rng.uniform(-8, 8))
        c_next = c.c1 if t == 0 else c.c2
        w_next = 2.0 * (c_next + c.k) * a_target + 2.0 * c_next * x
        w = CriticWeights(w_next, w_next)
        analytic = greedy_action(x, t, w, c)
        numeric = greedy_action_numeric(x, t, w, c, bracket=(-10.0, 10.0), tol=1e-9)
        assert abs(analytic - numeric) < 1e-6


def test_greedy_action_state_derivative():
    rng = np.random.default_rng(23)
    for _ in range(200):
        c = random_consts(rng)
        w = CriticWeights.from_array(rng.uniform(-0.5, 0.5, 4))
        t = int(rng.integers(0, 2))
        x = float(rng.uniform(-1, 1))
        fd = central_diff(lambda u: greedy_action(u, t, w, c), x)
        c_next = c.c1 if t == 0 else c.c2
        want = -c_next / (c_next + c.k)
        assert greedy_action_dx(t, c) == pytest.approx(want, rel=1e-15)
        assert abs(fd - want) <= 1e-6 * max(1.0, abs(want))
    assert greedy_action_dx(2, c) == 0.0


def test_unroll_closed_forms():
    c = ProblemConstants(c1=0.01, c2=0.01, k=0.01)
    w = CriticWeights(0.02, 0.0)
    traj = unroll(0.0, GreedyAnalytic(), w, c)
    assert traj.states[1] == pytest.approx(0.5, rel=1e-15)
    assert traj.states[2] == pytest.approx(0.25, rel=1e-15)

    rng = np.random.default_rng(24)
    for _ in range(200):
        c = random_consts(rng)
        w = CriticWeights.from_array(rng.uniform(-1, 1, 4))
        traj = unroll(0.0, GreedyAnalytic(), w, c)
        s1 = c.c1 + c.k
        s2 = c.c2 + c.k
        x1_closed = w.w1 / (2.0 * s1)
        x2_closed = (w.w2 * s1 + c.k * w.w1) / (2.0 * s2 * s1)
        a1_closed = (w.w2 * s1 - c.c2 * w.w1) / (2.0 * s2 * s1)
        assert traj.states[1] == pytest.approx(x1_closed, rel=1e-12, abs=1e-300)
        assert traj.states[2] == pytest.approx(x2_closed, rel=1e-12, abs=1e-18)
        assert traj.actions[1] == pytest.approx(a1_closed, rel=1e-12, abs=1e-18)


def test_zero_weights_is_fixed_point():
    c = ProblemConstants(c1=0.01, c2=0.01, k=0.01)
    traj = unroll(0.0, GreedyAnalytic(), CriticWeights(0, 0), c)
    assert traj.states == (0.0, 0.0, 0.0, 0.0)
    assert traj.total_reward == 0.0


def test_fixed_actor_reproduces_greedy_trajectory():
    rng = np.random.default_rng(25)
    for _ in range(100):
        c = random_consts(rng)
        w = CriticWeights.from_array(rng.uniform(-1, 1, 4))
        greedy_traj = unroll(0.0, GreedyAnalytic(), w, c)
        s1, s2 = c.c1 + c.k, c.c2 + c.k
        z0 = w.w1 / (2.0 * s1)
        z1 = (w.w2 * s1 - c.c2 * w.w1) / (2.0 * s2 * s1)
        actor_traj = unroll(0.0, FixedActor(z0, z1), w, c)
        for a, b in zip(greedy_traj.states, actor_traj.states):
            assert a == pytest.approx(b, rel=1e-12, abs=1e-18)


def test_greedy_numeric_policy_object():
    c = ProblemConstants(c1=0.2, c2=0.3, k=0.05)
    w = CriticWeights(0.1, -0.2)
    traj_a = unroll(0.0, GreedyAnalytic(), w, c)
    traj_n = unroll(0.0, GreedyNumeric(), w, c)
    for a, b in zip(traj_a.states, traj_n.states):
        assert a == pytest.approx(b, abs=1e-6)


def test_noisy_greedy_reproducible_and_zero_variance_exact():
    c = ProblemConstants(c1=0.01, c2=0.01, k=0.01)
    w = CriticWeights(0.03, -0.01)

    first = [unroll(0.0, NoisyGreedy(1e-4, seed=42), w, c) for _ in range(1)]
    second = [unroll(0.0, NoisyGreedy(1e-4, seed=42), w, c) for _ in range(1)]
    assert first[0].actions == second[0].actions

    p1 = NoisyGreedy(1e-4, seed=42)
    p2 = NoisyGreedy(1e-4, seed=43)
    assert unroll(0.0, p1, w, c).actions != unroll(0.0, p2, w, c).actions

    silent = unroll(0.0, NoisyGreedy(0.0, seed=42), w, c)
    pure = unroll(0.0, GreedyAnalytic(), w, c)
    assert silent.actions == pure.actions

    with pytest.raises(ValueError):
        NoisyGreedy(-1e-4, seed=1)


def test_noise_perturbs_both_controllable_actions():
    c = ProblemConstants(c1=0.01, c2=0.01, k=0.01)
    w = CriticWeights(0.0, 0.0)
    traj = unroll(0.0, NoisyGreedy(1e-4, seed=7), w, c)
    assert traj.actions[0] != 0.0
    assert traj.actions[1] != greedy_action(traj.states[1], 1, w, c)
    assert traj.actions[2] == 0.0


def test_golden_section_max():
    # Function-value comparisons flatten out near a smooth maximum, so the
    # attainable accuracy is ~sqrt(eps) regardless of the interval tol.
    assert golden_section_max(lambda a: -(a - 1.3) ** 2, -10, 10, tol=1e-10) == pytest.approx(
        1.3, abs=1e-6
    )
    assert golden_section_max(lambda a: math.cos(a), -1.5, 1.5, tol=1e-10) == pytest.approx(
        0.0, abs=1e-6
    )
