"""Deterministic random-stream derivation.

Every random draw in the package flows from a numpy ``SeedSequence``.  A
master seed fans out to child streams through ``spawn_key`` paths of small
integers, e.g. ``(study_id, trajectory, trial)``, so results are
reproducible and independent of execution order.
"""

from __future__ import annotations

import numpy as np

def seed_sequence(root, *path: int) -> np.random.SeedSequence:
    """Derive a child SeedSequence under ``root`` at the given key path."""
    if isinstance(root, np.random.SeedSequence):
        base_entropy = root.entropy
        base_key = tuple(root.spawn_key)
    else:
        base_entropy = int(root)
        base_key = ()
    return np.random.SeedSequence(base_entropy, spawn_key=base_key + tuple(int(p) for p in path))


def generator(root, *path: int) -> np.random.Generator:
    """Generator for the child stream at ``path`` under ``root``."""
    return np.random.default_rng(seed_sequence(root, *path))


def as_generator(rng) -> np.random.Generator:
    """Coerce an int seed, SeedSequence, or Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
