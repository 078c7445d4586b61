"""Deterministic pseudo-random numbers for reproducible data generation.

Every random draw in this package goes through :class:`Xoshiro256StarStar`
seeded via splitmix64, so that a (seed, draw order) pair pins down every
dataset, split, and weight initialization byte for byte, independently of
the host platform or library versions.

Reproducibility contract (any conforming reimplementation must follow it):

* State setup: the 64-bit seed initializes a splitmix64 generator whose
  first four outputs become the xoshiro256** state words ``s0..s3``.
* ``next_u64`` is the reference xoshiro256** step
  (``rotl(s1 * 5, 7) * 9`` output, shift/xor/rotate state update),
  all arithmetic modulo 2**64.
* Doubles: ``(next_u64() >> 11) * 2**-53`` gives a uniform double in
  [0, 1) with 53 random mantissa bits; ``uniform(lo, hi)`` scales it as
  ``lo + u * (hi - lo)``.
* Bounded ints: ``randbelow(n)`` is the multiply-shift reduction
  ``(next_u64() * n) >> 64`` (one draw per call, no rejection).
* Shuffles: Fisher-Yates from the last element down, swapping index ``i``
  with ``randbelow(i + 1)``.
* Derived streams: stream ``k`` of master seed ``s`` is seeded with
  ``s XOR k`` (:func:`derive_seed`); dataset sample ``m`` uses stream ``m``.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
_SPLITMIX_MUL2 = 0x94D049BB133111EB


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    """Reference splitmix64 stream, used to expand seeds into state words."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _SPLITMIX_GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _SPLITMIX_MUL1) & MASK64
        z = ((z ^ (z >> 27)) * _SPLITMIX_MUL2) & MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** generator with the documented seeding and draw rules."""

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s = [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()]

    def next_u64(self) -> int:
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

    def next_double(self) -> float:
        """Uniform double in [0, 1) built from 53 random mantissa bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform double in [lo, hi), one ``next_double`` per call."""
        return lo + self.next_double() * (hi - lo)

    def randbelow(self, n: int) -> int:
        """Integer in [0, n) via the multiply-shift reduction."""
        if n <= 0:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        return (self.next_u64() * n) >> 64

    def randint(self, lo: int, hi: int) -> int:
        """Integer in the closed range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.randbelow(hi - lo + 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle (descending index order)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(seed: int, stream: int) -> int:
    """Seed of derived stream ``stream``: the master seed XOR the index."""
    return (seed ^ stream) & MASK64
