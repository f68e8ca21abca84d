"""Seeded random draws for initial-condition recipes.

SplitMix64 is used instead of numpy's generators so that the per-cell
perturbations r_K are bit-reproducible across platforms and numpy versions.
Each species gets its own stream: stream i is seeded with
seed + (i+1)*GOLDEN (mod 2^64), and cells are drawn in cell-index order.
"""
import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """Minimal splitmix64 generator (Steele, Lea and Flood's mixer)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z ^= z >> 31
        return z

    def uniform(self) -> float:
        # 53-bit mantissa scaling, uniform on [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53


def species_stream(seed: int, species: int) -> SplitMix64:
    """Generator for one species' perturbation stream."""
    return SplitMix64((seed + (species + 1) * _GOLDEN) & _MASK)


def uniform_field(stream: SplitMix64, n: int) -> np.ndarray:
    """n uniform draws in cell-index order."""
    return np.array([stream.uniform() for _ in range(n)])
