"""Seedable, portable random numbers for the sampling stage.

The generator is xoshiro256** with its state expanded from a 64-bit seed by
splitmix64, exactly as the reference implementations specify:

* splitmix64 step:  z = (state += 0x9E3779B97F4A7C15);
  z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB;
  output z ^ z>>31.  Four successive outputs form the xoshiro state.
* xoshiro256** output:  rotl64(s1 * 5, 7) * 9, followed by the linear
  state transition (t = s1<<17; s2^=s0; s3^=s1; s1^=s2; s0^=s3; s2^=t;
  s3 = rotl64(s3, 45)).
* uniform double in [0, 1):  top 53 bits of the output, (u64 >> 11) * 2⁻⁵³.

Everything is plain integer arithmetic, so the stream is bit-identical on
every platform and Python build; a seed in a report is a complete record of
the randomness used.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_DOUBLE_SCALE = 2.0 ** -53


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64_stream(seed: int):
    """Infinite splitmix64 outputs from a 64-bit seed."""
    state = seed & _MASK
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        yield z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** seeded via splitmix64; see module docstring for the contract."""

    def __init__(self, seed: int):
        if not 0 <= seed < 2 ** 64:
            raise ValueError("seed must be an integer in [0, 2^64)")
        self.seed = seed
        stream = splitmix64_stream(seed)
        self._s = [next(stream) for _ in range(4)]
        if not any(self._s):
            # All-zero is the one forbidden xoshiro state; unreachable from
            # splitmix64 in practice, but cheap to rule out.
            self._s[0] = 1

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * _DOUBLE_SCALE

    def uniforms(self, n: int) -> np.ndarray:
        """n consecutive uniform doubles in [0, 1), in stream order."""
        out = np.empty(n)
        nxt = self.next_u64
        for i in range(n):
            out[i] = (nxt() >> 11) * _DOUBLE_SCALE
        return out
