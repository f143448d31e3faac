"""Keyed random streams.

Every random draw in the package comes from numpy's PCG64 bit generator
seeded through ``SeedSequence(seed, spawn_key=key)``. PCG64 output and
SeedSequence hashing are specified bit-for-bit, so a (seed, key) pair gives
the same stream on every platform. The harness uses keys
``(trial, STREAM_GAME)``, ``(trial, STREAM_SAMPLE)`` and
``(trial, STREAM_HOLDOUT)``, which makes trials independent of each other
and of scheduling.
"""

from __future__ import annotations

import numpy as np

STREAM_GAME = 0
STREAM_SAMPLE = 1
STREAM_HOLDOUT = 2

_U64 = (1 << 64) - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    if seed < 0 or seed > _U64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def as_generator(rng, seed: int = 0) -> np.random.Generator:
    """Accept a Generator, an int seed or None (falls back to ``seed``)."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return stream(seed)
    return stream(int(rng))
