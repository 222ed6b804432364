"""Integer-state SplitMix64 generator (Steele, Lea, Flood constants).

Used for every randomized control so that outputs are bit-reproducible on
any platform: floats are derived from the top 53 bits of each output.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & _MASK
        z = ((z ^ (z >> 27)) * MIX2) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("empty range")
        # rejection sampling keeps the draw unbiased
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            z = self.next_u64()
            if z < limit:
                return z % n


def halton(n: int, dim: int, skip: int = 1) -> list[tuple[float, ...]]:
    """First n points of the Halton sequence in [0,1)^dim (bases 2, 3, 5, ...)."""
    primes = [2, 3, 5, 7, 11, 13][:dim]
    out = []
    for i in range(skip, skip + n):
        pt = []
        for b in primes:
            f, r, k = 1.0, 0.0, i
            while k:
                f /= b
                r += f * (k % b)
                k //= b
            pt.append(r)
        out.append(tuple(pt))
    return out
