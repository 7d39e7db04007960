"""SplitMix64 stream generator.

Used instead of ``numpy.random`` wherever outputs must be bit-identical across
platforms and numpy releases (filter-bank weights, augmentation draws, GMM
initialisation). The algorithm is Steele, Lea & Flood's SplitMix64; values are
produced in bulk with wrapping uint64 arithmetic.
"""
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self, n: int) -> np.ndarray:
        """Return the next ``n`` 64-bit outputs as a uint64 array."""
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * _GOLDEN
            z = (z ^ (z >> np.uint64(30))) * _M1
            z = (z ^ (z >> np.uint64(27))) * _M2
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * int(_GOLDEN)) & _MASK
        return z

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        # top 53 bits -> [0, 1) exactly representable doubles
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
        return low + (high - low) * u

    def integers(self, n: int, low: int, high: int) -> np.ndarray:
        """Integers uniform on the closed range [low, high]."""
        span = high - low + 1
        return low + np.floor(self.uniform(n) * span).astype(np.int64)


def derive_seed(seed: int, index: int) -> int:
    """Seed for item ``index`` of a job seeded with ``seed``."""
    return (int(seed) + int(index)) & _MASK
