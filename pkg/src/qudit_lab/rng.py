"""Counter-based SplitMix64 stream with Box-Muller normal deviates.

The generator is bit-exact across platforms: the k-th raw word of a stream
with seed ``s`` is ``mix(s + k * GOLDEN_GAMMA)`` (mod 2**64), so blocks of
words are produced with vectorised uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MUL_1 = 0xBF58476D1CE4E5B9
MIX_MUL_2 = 0x94D049BB133111EB
# Odd constant for deriving child seeds; distinct from GOLDEN_GAMMA so child
# streams do not overlap the parent's counter sequence.
SPLIT_GAMMA = 0xD1B54A32D192ED03

_MASK = (1 << 64) - 1


def _mix_scalar(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * MIX_MUL_1) & _MASK
    z = ((z ^ (z >> 27)) * MIX_MUL_2) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_MUL_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_MUL_2)
    return z ^ (z >> np.uint64(31))


class RngStream:
    """Single-owner random stream. Never share one between workers; split it."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & _MASK
        self.counter = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed:#018x}, counter={self.counter})"

    def next_u64(self, n: int) -> np.ndarray:
        """Return the next ``n`` raw 64-bit words."""
        k = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            state = np.uint64(self.seed) + k * np.uint64(GOLDEN_GAMMA)
            return _mix_array(state)

    def uniform(self, n: int) -> np.ndarray:
        """Uniform deviates in [0, 1) with 53-bit resolution."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        """Standard normal deviates (Box-Muller, both branches used)."""
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        u1 = 1.0 - u[:m]  # (0, 1]: keeps log finite
        u2 = u[m:]
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        return z[:n]

    def complex_normal(self, shape) -> np.ndarray:
        """Complex Gaussian array with E|z|^2 = 1."""
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        n = int(np.prod(shape))
        z = self.normal(2 * n)
        return ((z[0::2] + 1j * z[1::2]) / np.sqrt(2.0)).reshape(shape)

    def split(self, k: int) -> "RngStream":
        """Child stream number ``k``; children with distinct ``k`` have distinct seeds."""
        return RngStream(_mix_scalar(self.seed + (int(k) + 1) * SPLIT_GAMMA))

    def spawn(self, count: int) -> list["RngStream"]:
        return [self.split(k) for k in range(count)]


def as_stream(rng: RngStream | int | None, default_seed: int = 0) -> RngStream:
    if rng is None:
        return RngStream(default_seed)
    if isinstance(rng, RngStream):
        return rng
    return RngStream(int(rng))
