"""Seedable random number generation for exploration noise.

The generator is xoshiro256++ seeded through SplitMix64, with Gaussian
variates produced by the Marsaglia polar method (the rejection variant of
the Box-Muller transform).  All three pieces are small, well-known
algorithms chosen so that a trace produced at a fixed seed can be
reproduced exactly from any implementation of the same recipe:

* SplitMix64 expands the 64-bit seed into the four 64-bit state words.
* xoshiro256++ produces the uint64 stream; uniforms take the top 53 bits,
  so u = (next() >> 11) * 2**-53 in [0, 1).
* The polar method draws u, v in (-1, 1), rejects unless 0 < s = u*u + v*v < 1,
  and returns (u, v) * sqrt(-2*ln(s)/s).

The polar method is used instead of the trigonometric Box-Muller form on
purpose: it needs only log and sqrt, which lets the compiled simulation
kernel reproduce this stream bit-for-bit (sin/cos pairs are vulnerable to
sincos fusion under JIT compilation).

This module keeps state in plain Python integers masked to 64 bits; the hot
simulation kernel in ``_kernels`` inlines the identical arithmetic on numpy
uint64 scalars, and the test suite pins the two streams against each other.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256pp:
    """xoshiro256++ with SplitMix64 seeding."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        s = self.seed
        state = []
        for _ in range(4):
            s, out = _splitmix64(s)
            state.append(out)
        self._s = state

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s0 + s3) & _MASK64, 23) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        """Uniform in [0, 1) from the top 53 bits."""
        return (self.next_uint64() >> 11) * 2.0**-53


class GaussianSampler:
    """Standard normal variates via the polar method over Xoshiro256pp.

    Variates come in pairs; a single-variate call hands out the spare from
    the previous pair first, so interleaved pair/single consumers see the
    same underlying stream.
    """

    def __init__(self, seed: int):
        self._rng = Xoshiro256pp(seed)
        self._spare: float | None = None

    def normal_pair(self) -> tuple[float, float]:
        if self._spare is not None:
            # Pairs must stay aligned with the raw stream; drop any spare.
            self._spare = None
        while True:
            u = 2.0 * self._rng.uniform() - 1.0
            v = 2.0 * self._rng.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        f = math.sqrt(-2.0 * math.log(s) / s)
        return u * f, v * f

    def normal(self) -> float:
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return z
        z0, z1 = self.normal_pair()
        self._spare = z1
        return z0
