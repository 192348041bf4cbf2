"""Minimal deterministic 64-bit PRNG (splitmix64).

Used wherever reproducibility across implementations matters: the dataset
split shuffle and the per-tree seed streams of the forest. The algorithm is
splitmix64 (Steele, Lea & Flood; also the seeder of xoroshiro), chosen
because it is tiny, well known, and trivially portable. Integers in
[0, n) are drawn by modulo reduction; the slight bias is irrelevant here
(n is at most a few hundred) and keeps the draw sequence easy to replicate.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 stream seeded with an arbitrary Python integer."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n) via modulo reduction."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, high index down to 1."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
