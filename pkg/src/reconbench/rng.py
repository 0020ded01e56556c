"""Pinned, platform-independent random streams.

Every random draw in the package goes through :class:`Stream`, which reads raw
64-bit words from numpy's Philox-4x64 counter-based bit generator keyed
directly with the seed (no SeedSequence mixing). All transformations of the
raw words (uniforms, bounded integers, Gaussians, shuffles) are implemented
here so that numpy's ``Generator`` method evolution cannot change a stream.

Stream version: ``philox4x64-v1``.
"""
from __future__ import annotations

import hashlib

import numpy as np

STREAM_VERSION = "philox4x64-v1"

_U64_MASK = (1 << 64) - 1
_TWO_M53 = 2.0**-53


def derive_seed(master: int, *parts: object) -> int:
    """Mix ``master`` with a label tuple into a new 64-bit seed.

    ``master XOR blake2b-64("part0|part1|...")``: adding a new label never
    shifts the seeds of existing labels.
    """
    label = "|".join(str(p) for p in parts).encode("utf-8")
    h = int.from_bytes(hashlib.blake2b(label, digest_size=8).digest(), "little")
    return (int(master) & _U64_MASK) ^ h


class Stream:
    """Deterministic random stream for a 64-bit seed."""

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0 or seed > _U64_MASK:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._bitgen = np.random.Philox(key=seed)

    def raw(self, n: int) -> np.ndarray:
        return self._bitgen.random_raw(int(n)).astype(np.uint64, copy=False)

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1) with 53 random bits each."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def integers(self, high: int, n: int) -> np.ndarray:
        """``n`` integers in [0, high) by scaled 53-bit uniforms."""
        if high < 1:
            raise ValueError("high must be positive")
        out = np.floor(self.uniform(n) * high).astype(np.int64)
        return np.minimum(out, high - 1)

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normal draws by the Box-Muller transform."""
        n = int(n)
        m = (n + 1) // 2
        u1 = ((self.raw(m) >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_M53
        u2 = self.uniform(m)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]

    def sample_indices(self, n: int, k: int) -> np.ndarray:
        """First ``k`` entries of a forward Fisher-Yates shuffle of ``range(n)``.

        Stopping after ``k`` swaps yields exactly the prefix a full shuffle
        would produce, so ``sample_indices(n, n)`` is a uniform permutation.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct indices from {n}")
        perm = np.arange(n, dtype=np.int64)
        u = self.uniform(k)
        for i in range(k):
            j = i + min(int(u[i] * (n - i)), n - i - 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm[:k].copy()

    def permutation(self, n: int) -> np.ndarray:
        return self.sample_indices(n, n)
