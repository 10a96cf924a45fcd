"""Deterministic random streams built on the counter-based Philox generator.

Stream-tag registry (first key element under a given seed): 0 true-network
draws (second element counts regeneration attempts), 1 inputs, 2 noise,
3 optimizer initialization, 4 train/test splits.  Keeping the tags disjoint
means one seed drives a whole replicate without stream collisions.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_U53 = 1 << 53


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent Philox stream for (seed, key).

    Distinct keys under the same seed yield non-overlapping streams, so
    replicates drawn concurrently cannot perturb each other's results.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def derive_seed(master_seed: int, index: int) -> int:
    """Derive the 64-bit seed of replicate `index` from a master seed."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def standard_normal(gen: np.random.Generator, size=None):
    """N(0,1) draws by inverse CDF on 53-bit uniforms.

    The uniform is kept strictly inside (0, 1) so the quantile is always
    finite; the sampling method is pinned here so fixtures stay
    bit-reproducible.
    """
    u = gen.integers(1, _U53, size=size).astype(np.float64) / _U53
    return ndtri(u)
