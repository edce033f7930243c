"""Reproducible random streams.

Bits come from Philox4x64-10 (Random123) with key ``(seed, stream)``. Blocks
are generated for counters 1, 2, 3, ... (the 256-bit counter is incremented
before each block) and each block yields four consecutive 64-bit words. From
each word ``r``:

* uniform in [0, 1):  ``(r >> 11) * 2**-53``
* uniform in (0, 1]:  ``((r >> 11) + 1) * 2**-53``

Normals use the basic Box-Muller transform on word pairs ``(r1, r2)``::

    u1 = ((r1 >> 11) + 1) * 2**-53        # (0, 1], keeps log finite
    u2 = (r2 >> 11) * 2**-53
    z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)

emitted in the order z0, z1, z0', z1', ... . Test vectors for seed 0 are
pinned in ``tests/test_sampling.py``.
"""
from __future__ import annotations

import numpy as np

_SCALE = 2.0**-53


class Stream:
    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= seed < 2**64 or not 0 <= stream < 2**64:
            raise ValueError("seed and stream must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream = int(stream)
        self._bits = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))

    def raw(self, n: int) -> np.ndarray:
        return np.asarray(self._bits.random_raw(int(n)), dtype=np.uint64).reshape(-1)

    def uniform(self, n: int) -> np.ndarray:
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _SCALE

    def normal(self, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        count = int(np.prod(shape))
        pairs = (count + 1) // 2
        words = self.raw(2 * pairs).reshape(pairs, 2)
        u1 = ((words[:, 0] >> np.uint64(11)).astype(np.float64) + 1.0) * _SCALE
        u2 = (words[:, 1] >> np.uint64(11)).astype(np.float64) * _SCALE
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.empty((pairs, 2))
        out[:, 0] = radius * np.cos(angle)
        out[:, 1] = radius * np.sin(angle)
        return out.reshape(-1)[:count].reshape(shape)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates: for i = n-1 .. 1 swap i with floor(u * (i + 1))."""
        perm = np.arange(n)
        if n < 2:
            return perm
        u = self.uniform(n - 1)
        for step, i in enumerate(range(n - 1, 0, -1)):
            j = int(u[step] * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return perm
