"""Deterministic 64-bit PRNG used for all randomness in this package.

The generator is xorshift64* with the exact recurrence below, so any
implementation (in any language) that follows it reproduces identical
streams byte for byte:

    state ^= state >> 12
    state ^= (state << 25) mod 2**64
    state ^= state >> 27
    output = (state * 0x2545F4914F6CDD1D) mod 2**64

A seed of 0 would be a fixed point of the xorshift recurrence, so it is
remapped to the constant 0x9E3779B97F4A7C15.

Derived draws, in the order they consume 64-bit outputs:

* ``next_unit``     -> ((output >> 11) + 1) * 2**-53, a uniform in (0, 1].
* ``next_uniform``  -> lo + (hi - lo) * (output >> 11) * 2**-53, in [lo, hi).
* ``next_gaussian`` -> Box-Muller: draws u1, u2 via ``next_unit`` and returns
  sqrt(-2 ln u1) * cos(2 pi u2).  The sine partner is discarded, so exactly
  two 64-bit outputs are consumed per normal deviate.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_ZERO_SEED_REMAP = 0x9E3779B97F4A7C15
_INV_2_53 = 2.0 ** -53


class Xorshift64Star:
    """xorshift64* stream seeded from a 64-bit unsigned integer."""

    def __init__(self, seed: int) -> None:
        state = seed & _MASK64
        self._state = state if state != 0 else _ZERO_SEED_REMAP

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * _MULT) & _MASK64

    def next_unit(self) -> float:
        """Uniform float in (0, 1]; never 0, so it is safe under log()."""
        return ((self.next_u64() >> 11) + 1) * _INV_2_53

    def next_uniform(self, lo: float, hi: float) -> float:
        """Uniform float in [lo, hi)."""
        return lo + (hi - lo) * ((self.next_u64() >> 11) * _INV_2_53)

    def next_gaussian(self) -> float:
        """Standard normal deviate via the Box-Muller transform."""
        u1 = self.next_unit()
        u2 = self.next_unit()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
