"""Portable seeded random streams.

The generator is xoshiro256** seeded through splitmix64, both defined on
unsigned 64-bit integers, so a stream is reproducible bit-for-bit in any
language:

* ``splitmix64``: ``state += 0x9E3779B97F4A7C15``; then
  ``z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9``,
  ``z = (z ^ (z >> 27)) * 0x94D049BB133111EB``, output ``z ^ (z >> 31)``.
* ``Xoshiro256`` state is four consecutive splitmix64 outputs from the seed.
* ``random()`` returns ``(next_u64() >> 11) * 2**-53``.
* ``mix(master, i)`` is the ``(i + 1)``-th splitmix64 output started from
  ``master``; it derives independent per-cell seeds.
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _finalize(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(state):
    """Advance a splitmix64 state; returns ``(new_state, output)``."""
    state = (state + GOLDEN) & MASK64
    return state, _finalize(state)


def mix(master, index):
    """Seed for cell ``index`` derived from ``master``; independent of other cells."""
    if index < 0:
        raise ValueError("cell index must be nonnegative")
    return _finalize((master + (index + 1) * GOLDEN) & MASK64)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** generator with a splitmix64 seeding routine."""

    def __init__(self, seed):
        state = int(seed) & MASK64
        s = []
        for _ in range(4):
            state, out = splitmix64(state)
            s.append(out)
        self._s = s

    def next_u64(self):
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self):
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def random_array(self, n):
        """``n`` uniform doubles in [0, 1), in stream order."""
        nxt = self.next_u64
        return np.fromiter(((nxt() >> 11) * 2.0**-53 for _ in range(n)), dtype=float, count=n)

    def uniform(self, low, high, n):
        return low + (high - low) * self.random_array(n)

    def integers(self, low, high, n):
        """Integers in [low, high] inclusive, by 128-bit multiply-shift."""
        span = high - low + 1
        if span <= 0:
            raise ValueError("empty integer range")
        nxt = self.next_u64
        return np.fromiter((low + ((nxt() * span) >> 64) for _ in range(n)), dtype=np.int64, count=n)

    def complex_unit_disk(self, n):
        """``n`` complex numbers with uniform modulus in [0,1) and uniform phase."""
        mag = self.random_array(n)
        phase = self.random_array(n)
        return mag * np.exp(2j * math.pi * phase)
