"""Deterministic 64-bit RNG streams for episode sampling.

SplitMix64 keeps the sampler specifiable across languages and lets every
episode own an independent stream derived from (base seed, episode_id),
so parallel evaluation order cannot change results.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 avalanche step (finalizer of the incremented state)."""
    x = (x + GOLDEN) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def child_seed(seed: int, stream_id: int) -> int:
    """Derive an independent 64-bit seed for one stream (episode or grid point)."""
    return splitmix64((seed & MASK64) ^ splitmix64(stream_id & MASK64))


class SplitMix64:
    """Sequential SplitMix64 generator with unbiased bounded draws."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("bound must be positive")
        bound = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < bound:
                return x % n

    def partial_shuffle(self, items: list, k: int) -> list:
        """First k entries of a Fisher-Yates shuffle of items (in place)."""
        n = len(items)
        for i in range(min(k, n - 1)):
            j = i + self.below(n - i)
            items[i], items[j] = items[j], items[i]
        return items[:k]
