"""Deterministic, named random streams.

All randomness flows through counter-based Philox generators keyed by a base
seed plus a spawn key, so independent consumers (folds, blocks) draw from
disjoint streams and serial and parallel execution agree.
"""

import numpy as np


def seed_sequence(seed, *key):
    """Named sub-stream of ``seed``. ``seed`` may itself be a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        if not key:
            return seed
        return np.random.SeedSequence(
            entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key)
        )
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))


def generator(seed, *key):
    """Philox generator for the named sub-stream of ``seed``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *key)))
