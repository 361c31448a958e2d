"""Deterministic counter-based random streams.

Every stochastic piece of the pipeline (init, dropout masks, edge sampling,
data splits) draws from an `Rng`, never from global numpy state.  The
generator is SplitMix64: output i is the xorshift-multiply avalanche of
``seed + (i+1) * GOLDEN`` modulo 2**64, i.e. the reference SplitMix64
sequence for that seed.  Because each output depends only on its counter,
bulk fills vectorize and the stream is identical no matter how draws are
batched.  The raw 64-bit stream is exact on every platform; float
transforms (Box-Muller) inherit the platform's libm rounding.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1

# derived substreams fold the key through the same mixer with this salt so
# that substream(0) differs from the parent stream itself
_STREAM_SALT = 0x632BE59BD9B4E019

_INV53 = 2.0 ** -53


def mix64(z: int) -> int:
    """Scalar SplitMix64 finalizer on python ints (used for stream keys)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps mod 2**64, which is exactly what we want
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class Rng:
    """Seeded stream of raw 64-bit words with the usual float transforms.

    `substream(key)` derives an independent stream; parent and child never
    share counters, so interleaving draws between them cannot change either
    sequence.
    """

    def __init__(self, seed: int, _base: int | None = None):
        if _base is None:
            _base = int(seed) & _MASK
        self._base = np.uint64(_base)
        self._counter = 0

    def substream(self, key: int) -> "Rng":
        child = mix64((int(self._base) + mix64((int(key) & _MASK) + _STREAM_SALT)) & _MASK)
        return Rng(0, _base=child)

    def raw(self, size: int) -> np.ndarray:
        """Next `size` words of the stream as uint64."""
        if size < 0:
            raise ValueError("size must be non-negative")
        idx = np.arange(self._counter + 1, self._counter + size + 1, dtype=np.uint64)
        self._counter += size
        with np.errstate(over="ignore"):
            return _mix_array(self._base + idx * np.uint64(GOLDEN))

    def uniform(self, size: int) -> np.ndarray:
        """float64 in [0, 1), 53-bit resolution."""
        return (self.raw(size) >> np.uint64(11)).astype(np.float64) * _INV53

    def _uniform_open(self, size: int) -> np.ndarray:
        # (0, 1], safe under log
        return ((self.raw(size) >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV53

    def normal(self, size: int) -> np.ndarray:
        """Standard Gaussian via Box-Muller on consecutive pairs."""
        half = (size + 1) // 2
        u1 = self._uniform_open(half)
        u2 = self.uniform(half)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * half)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:size]

    def bernoulli_keep(self, keep_prob: float, size: int) -> np.ndarray:
        """Boolean keep mask, P(True) = keep_prob, one draw per slot."""
        if not 0.0 <= keep_prob <= 1.0:
            raise ValueError(f"keep_prob must be in [0, 1], got {keep_prob}")
        return self.uniform(size) < keep_prob

    def permutation(self, n: int) -> np.ndarray:
        """Random order of range(n) by sorting one uniform key per element."""
        return np.argsort(self.raw(n), kind="stable")

    def weighted_sample_without_replacement(self, weights: np.ndarray, k: int) -> np.ndarray:
        """k distinct indices drawn with probability proportional to weight.

        Uses exponential sort keys (one uniform per entry, key log(u)/w, take
        the top k), which draws from the same distribution as sequentially
        sampling without replacement.  Entries with weight <= 0 are never
        selected; if fewer than k entries have positive weight, all of them
        are returned.  The result is sorted ascending.
        """
        weights = np.asarray(weights, dtype=np.float64)
        u = self._uniform_open(weights.size)
        support = weights > 0.0
        keys = np.full(weights.size, -np.inf)
        keys[support] = np.log(u[support]) / weights[support]
        k_eff = min(int(k), int(support.sum()))
        if k_eff == 0:
            return np.empty(0, dtype=np.int64)
        order = np.argsort(-keys, kind="stable")
        return np.sort(order[:k_eff]).astype(np.int64)
