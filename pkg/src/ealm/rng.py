"""Portable pseudo-random stream: splitmix64 seeding of xoshiro256**.

Both algorithms are public-domain reference designs (Vigna).  Doubles are
drawn as ``(next() >> 11) * 2**-53``, which any language with 64-bit integer
arithmetic reproduces bit for bit.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(state: int):
    """Yield the splitmix64 sequence started at ``state``."""
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        yield z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256:
    def __init__(self, seed: int):
        sm = splitmix64(seed & _MASK)
        self.s = [next(sm) for _ in range(4)]

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1)."""
        return np.array([(self.next_u64() >> 11) * (1.0 / (1 << 53)) for _ in range(n)])

    def uniform(self, lo: float, hi: float, n: int) -> np.ndarray:
        return lo + (hi - lo) * self.random(n)
