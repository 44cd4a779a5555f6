import numpy as np
import pytest

from criticlab import ProblemConstants


def central_diff(f, x, h=1e-6):
    """Two-sided finite difference."""
    return (f(x + h) - f(x - h)) / (2.0 * h)


def rel_err(got, want, floor=1e-12):
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    scale = max(np.max(np.abs(want)), floor)
    return np.max(np.abs(got - want)) / scale


@pytest.fixture
def consts_lam0():
    """Constants of the lam=0 divergence experiments."""
    return ProblemConstants(c1=0.01, c2=0.01, k=0.01, gamma=1.0, lam=0.0)


@pytest.fixture
def consts_lam1():
    """Constants of the lam=1 divergence/convergence experiments."""
    return ProblemConstants(c1=0.99, c2=0.01, k=0.01, gamma=1.0, lam=1.0)


def random_consts(rng, lam=None, gamma=1.0):
    return ProblemConstants(
        c1=float(rng.uniform(0.005, 1.0)),
        c2=float(rng.uniform(0.005, 1.0)),
        k=float(rng.uniform(0.005, 1.0)),
        gamma=gamma,
        lam=float(rng.uniform(0.0, 1.0)) if lam is None else lam,
    )
