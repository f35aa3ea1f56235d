"""Seeding helpers.

Every random draw in the package comes from numpy's PCG64 bit generator,
keyed by a :class:`numpy.random.SeedSequence` built from the user seed plus a
tuple of integer keys (realization index, run index, ...).  Gaussian variates
use numpy's ziggurat sampler (``Generator.standard_normal``).  Outputs are
therefore bit-reproducible per seed and independent of loop scheduling.
"""
from __future__ import annotations

import numpy as np


def child_generator(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0 or any(k < 0 for k in keys):
        raise ValueError("seeds and keys must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def generator(seed: int) -> np.random.Generator:
    return child_generator(seed)
