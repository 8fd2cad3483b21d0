"""Portable deterministic randomness for game sessions.

Every stochastic draw in the bundled games flows through :class:`Rng`, a
splitmix64 generator over a single 64-bit state word.  The generator was
chosen because it is trivial to re-implement bit-exactly in any language,
which keeps golden trajectory fixtures portable.

Derived streams use :func:`mix64`; in particular the per-episode seed of a
session is ``mix64(session_seed, episode_index)``.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _scramble(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & MASK64
    z = (z ^ (z >> 27)) * _MIX2 & MASK64
    return z ^ (z >> 31)


def mix64(a: int, b: int) -> int:
    """Combine two integers into one 64-bit seed. Order-sensitive."""
    return _scramble((_scramble(a & MASK64) + (b & MASK64)) & MASK64)


class Rng:
    """splitmix64 stream; all methods consume exactly one 64-bit draw."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        return _scramble(self.state)

    def random(self) -> float:
        # 53-bit mantissa, uniform in [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53

    def randrange(self, n: int) -> int:
        """Integer in [0, n). Modulo reduction, documented and portable."""
        if n <= 0:
            raise ValueError("randrange needs n > 0")
        return self.next_u64() % n

    def chance(self, p: float) -> bool:
        return self.random() < p

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates, high index down."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randrange(i + 1)
            seq[i], seq[j] = seq[j], seq[i]
