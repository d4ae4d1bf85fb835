"""Seed-stream derivation for reproducible experiments.

Every randomized routine takes a single integer seed and derives independent
substreams keyed by (experiment, parameter index, ...) so that results do not
depend on evaluation order or thread count.
"""

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for substream `key` of the master `seed`."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
