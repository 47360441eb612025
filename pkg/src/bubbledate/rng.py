"""Deterministic random-stream derivation.

Every stochastic routine in the package derives its generator from a base
seed plus an integer key (replication index, draw index, ...) through
numpy's SeedSequence spawning mechanism.  Streams depend only on their key,
never on evaluation order, so parallel schedules reproduce serial output
bit for bit.
"""
from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the (seed, *key) stream.

    The same arguments always produce the same stream, and distinct keys
    produce statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(seed_or_rng) -> np.random.Generator:
    """Pass through a Generator, or build the root stream for an int seed."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return stream(int(seed_or_rng))
