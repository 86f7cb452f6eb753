"""Seeded substreams for reproducible experiments.

Streams come from numpy's Philox4x64 counter-based generator keyed by the
experiment seed plus a SplitMix64 hash of the substream path, so replication
(n, r) is independent of every other replication and can be regenerated in
isolation.  Gaussians are drawn by inverse-CDF through normal_quantile so the
whole pipeline shares one audited accuracy path.
"""

import numpy as np

from .gauss import normal_quantile

_MASK64 = (1 << 64) - 1


def _splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def substream(seed, *path):
    """Independent Generator for the given (seed, *path) coordinates."""
    h = seed & _MASK64
    for p in path:
        h = _splitmix64(h ^ (int(p) & _MASK64))
    key = np.array([seed & _MASK64, h], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def standard_normals(rng, size):
    """Inverse-CDF Gaussian draws from uniform variates of the stream."""
    u = rng.random(size)
    # rng.random() can return exactly 0.0 (probability 2^-53 per draw);
    # map it to the midpoint of the lowest cell to keep the quantile finite.
    u = np.where(u == 0.0, 2.0 ** -54, u)
    return normal_quantile(u)
