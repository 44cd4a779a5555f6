"""Compiled simulation kernel with a pure-Python fallback.

The learning loop is strictly sequential (iteration n+1 needs the weights
from iteration n) and runs for up to ~1e9 iterations, so it is written as
one self-contained scalar loop and JIT-compiled with numba.  The same
source runs uncompiled when numba is unavailable or when the environment
variable ``CRITICLAB_BACKEND=python`` requests the fallback; the two paths
execute identical float64 arithmetic and produce bit-identical traces
(``criticlab bench`` measures the speed difference and the test suite pins
the equality).

The kernel inlines the xoshiro256++ / polar-method noise generator from
``rng`` on numpy uint64 scalars so that nothing in the hot loop calls back
into Python.  The algorithm/weighting selectors are small integer codes;
``harness`` owns the mapping from configuration objects to kernel
arguments.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


BACKEND_ENV_VAR = "CRITICLAB_BACKEND"

ALG_TD = 0
ALG_SARSA = 1
ALG_VGL = 2
ALG_GDHP = 3

OMEGA_IDENTITY = 0
OMEGA_CURVATURE = 1

OUTCOME_COMPLETED = 0
OUTCOME_DIVERGED = 1
OUTCOME_CONVERGED = 2


def requested_backend() -> str:
    value = os.environ.get(BACKEND_ENV_VAR, "numba").strip().lower()
    if value not in ("numba", "python"):
        raise ValueError(
            f"{BACKEND_ENV_VAR} must be 'numba' or 'python', got {value!r}"
        )
    return value


def active_backend() -> str:
    """Backend that simulate() will actually use."""
    if requested_backend() == "numba" and NUMBA_AVAILABLE:
        return "numba"
    return "python"


def _simulate_loop(
    seed,
    n_iterations,
    p1,
    p2,
    w3,
    w4,
    f11,
    f12,
    f21,
    f22,
    c1,
    c2,
    k,
    gamma,
    lam,
    alpha,
    noise_std,
    alg,
    omega_mode,
    gdhp_mix,
    record_every,
    div_threshold,
    conv_threshold,
    out_iter,
    out_p1,
    out_p2,
    out_pnorm,
):
    # xoshiro256++ state from four SplitMix64 outputs of the seed
    sm = np.uint64(seed)
    s0 = np.uint64(0)
    s1 = np.uint64(0)
    s2 = np.uint64(0)
    s3 = np.uint64(0)
    for i in range(4):
        sm = sm + np.uint64(0x9E3779B97F4A7C15)
        z = sm
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
        if i == 0:
            s0 = z
        elif i == 1:
            s1 = z
        elif i == 2:
            s2 = z
        else:
            s3 = z

    om1 = 1.0
    om2 = 1.0
    if omega_mode == OMEGA_CURVATURE:
        om1 = 1.0 / (2.0 * (c1 + k))
        om2 = 1.0 / (2.0 * (c2 + k))

    n_rows = 0
    out_iter[n_rows] = 0
    out_p1[n_rows] = p1
    out_p2[n_rows] = p2
    out_pnorm[n_rows] = math.sqrt(p1 * p1 + p2 * p2)
    n_rows += 1

    outcome = OUTCOME_COMPLETED
    outcome_iter = n_iterations

    for it in range(1, n_iterations + 1):
        w1 = f11 * p1 + f12 * p2
        w2 = f21 * p1 + f22 * p2

        # greedy actions from x0 = 0, with optional exploration noise
        a0 = w1 / (2.0 * (c1 + k))
        if noise_std > 0.0:
            # one polar-method pair per iteration
            while True:
                r = ((s0 + s3) << np.uint64(23) | (s0 + s3) >> np.uint64(41)) + s0
                t = s1 << np.uint64(17)
                s2 ^= s0
                s3 ^= s1
                s1 ^= s2
                s0 ^= s3
                s2 ^= t
                s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
                u1 = float(r >> np.uint64(11)) * 1.1102230246251565e-16  # 2**-53
                r = ((s0 + s3) << np.uint64(23) | (s0 + s3) >> np.uint64(41)) + s0
                t = s1 << np.uint64(17)
                s2 ^= s0
                s3 ^= s1
                s1 ^= s2
                s0 ^= s3
                s2 ^= t
                s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
                u2 = float(r >> np.uint64(11)) * 1.1102230246251565e-16
                u = 2.0 * u1 - 1.0
                v = 2.0 * u2 - 1.0
                s = u * u + v * v
                if 0.0 < s < 1.0:
                    break
            g = math.sqrt(-2.0 * math.log(s) / s)
            a0 = a0 + noise_std * (u * g)
            noise1 = noise_std * (v * g)
        else:
            noise1 = 0.0

        x1 = a0
        a1 = (w2 - 2.0 * c2 * x1) / (2.0 * (c2 + k)) + noise1
        x2 = x1 + a1

        r1 = -k * a1 * a1
        r2 = -x2 * x2

        dw1 = 0.0
        dw2 = 0.0
        dw3 = 0.0
        dw4 = 0.0

        if alg == ALG_TD or alg == ALG_SARSA or alg == ALG_GDHP:
            # the mixing rule is defined from the lam=0 updates
            tdlam = 0.0 if alg == ALG_GDHP else lam
            v1 = -c1 * x1 * x1 + w1 * x1 + w3
            v2 = -c2 * x2 * x2 + w2 * x2 + w4
            vt2 = r2
            vt1 = r1 + gamma * (tdlam * vt2 + (1.0 - tdlam) * v2)
            d1 = vt1 - v1
            d2 = vt2 - v2
            # dV/dw is zero at t=0, so the t=0 term never contributes
            scale = gamma * gamma if alg == ALG_SARSA else 1.0
            dw1 = scale * x1 * d1
            dw2 = scale * x2 * d2
            dw3 = scale * d1
            dw4 = scale * d2

        if alg == ALG_VGL or alg == ALG_GDHP:
            g1 = -2.0 * c1 * x1 + w1
            g2 = -2.0 * c2 * x2 + w2
            gt2 = -2.0 * x2
            glam = 0.0 if alg == ALG_GDHP else lam
            gt1 = (2.0 * k * c2 * a1) / (c2 + k) + gamma * (k / (c2 + k)) * (
                glam * gt2 + (1.0 - glam) * g2
            )
            vg1 = om1 * (gt1 - g1)
            vg2 = om2 * (gt2 - g2)
            if alg == ALG_GDHP:
                dw1 = gdhp_mix * vg1 + (1.0 - gdhp_mix) * dw1
                dw2 = gdhp_mix * vg2 + (1.0 - gdhp_mix) * dw2
                dw3 = (1.0 - gdhp_mix) * dw3
                dw4 = (1.0 - gdhp_mix) * dw4
            else:
                dw1 = vg1
                dw2 = vg2

        dw1 *= alpha
        dw2 *= alpha
        p1 += f11 * dw1 + f21 * dw2
        p2 += f12 * dw1 + f22 * dw2
        w3 += alpha * dw3
        w4 += alpha * dw4

        pnorm = math.sqrt(p1 * p1 + p2 * p2)
        recorded = False
        if it % record_every == 0:
            out_iter[n_rows] = it
            out_p1[n_rows] = p1
            out_p2[n_rows] = p2
            out_pnorm[n_rows] = pnorm
            n_rows += 1
            recorded = True
        if not math.isfinite(pnorm) or pnorm > div_threshold:
            outcome = OUTCOME_DIVERGED
            outcome_iter = it
        elif pnorm < conv_threshold:
            outcome = OUTCOME_CONVERGED
            outcome_iter = it
        if outcome != OUTCOME_COMPLETED:
            if not recorded:
                out_iter[n_rows] = it
                out_p1[n_rows] = p1
                out_p2[n_rows] = p2
                out_pnorm[n_rows] = pnorm
                n_rows += 1
            return n_rows, outcome, outcome_iter

    # Completed: make sure the final iterate is on record.
    if out_iter[n_rows - 1] != n_iterations:
        out_iter[n_rows] = n_iterations
        out_p1[n_rows] = p1
        out_p2[n_rows] = p2
        out_pnorm[n_rows] = math.sqrt(p1 * p1 + p2 * p2)
        n_rows += 1
    return n_rows, outcome, outcome_iter


_simulate_jit = None


def _jit_kernel():
    global _simulate_jit
    if _simulate_jit is None:
        # nogil lets independent runs (preset sweeps, seed batches) execute
        # on real threads; a single run stays sequential by nature.
        _simulate_jit = njit(cache=True, nogil=True)(_simulate_loop)
    return _simulate_jit


def simulate(
    seed: int,
    n_iterations: int,
    p0,
    w34_0,
    F,
    c1: float,
    c2: float,
    k: float,
    gamma: float,
    lam: float,
    alpha: float,
    noise_std: float,
    alg: int,
    omega_mode: int,
    gdhp_mix: float,
    record_every: int,
    div_threshold: float,
    conv_threshold: float,
):
    """Run the learning loop; returns (iters, p1s, p2s, pnorms, outcome, at).

    Output arrays are trimmed to the recorded rows.  Backend selection
    follows CRITICLAB_BACKEND at call time.
    """
    capacity = n_iterations // record_every + 3
    out_iter = np.empty(capacity, dtype=np.int64)
    out_p1 = np.empty(capacity, dtype=np.float64)
    out_p2 = np.empty(capacity, dtype=np.float64)
    out_pnorm = np.empty(capacity, dtype=np.float64)

    args = (
        np.uint64(seed),
        int(n_iterations),
        float(p0[0]),
        float(p0[1]),
        float(w34_0[0]),
        float(w34_0[1]),
        float(F[0][0]),
        float(F[0][1]),
        float(F[1][0]),
        float(F[1][1]),
        float(c1),
        float(c2),
        float(k),
        float(gamma),
        float(lam),
        float(alpha),
        float(noise_std),
        int(alg),
        int(omega_mode),
        float(gdhp_mix),
        int(record_every),
        float(div_threshold),
        float(conv_threshold),
        out_iter,
        out_p1,
        out_p2,
        out_pnorm,
    )
    if active_backend() == "numba":
        n_rows, outcome, at = _jit_kernel()(*args)
    else:
        # Suppress benign uint64 wraparound warnings from the inlined RNG.
        with np.errstate(over="ignore"):
            n_rows, outcome, at = _simulate_loop(*args)
    return (
        out_iter[:n_rows].copy(),
        out_p1[:n_rows].copy(),
        out_p2[:n_rows].copy(),
        out_pnorm[:n_rows].copy(),
        int(outcome),
        int(at),
    )
