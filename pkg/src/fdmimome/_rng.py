"""Counter-based RNG substreams.

Every Monte Carlo loop draws from ``substream(seed, *key)`` where the key
encodes the cell/trial index. Streams are independent and reproducible
bit-for-bit whether trials run serially or in parallel.
"""

import numpy as np


_MASK64 = (1 << 64) - 1


def substream(seed, *key):
    """Generator for one (seed, key...) cell; deterministic across runs.

    Entries are folded to unsigned 64-bit words so negative seeds or grid
    values (e.g. dB levels below zero) derive valid, distinct streams.
    """
    words = tuple(int(k) & _MASK64 for k in (seed, *key))
    return np.random.default_rng(np.random.SeedSequence(words))


def complex_normal(rng, shape, variance=1.0):
    """I.i.d. circularly symmetric complex Gaussian entries, given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
