"""
Seed derivation for reproducible, order-independent simulation.

All random streams derive from a master seed through numpy's SeedSequence
spawn keys, so the stream for (master, N, trial, stream) can be rebuilt on
its own, in any process, without replaying the work that came before it.
"""
from __future__ import annotations

import numpy as np

SeedLike = int | np.random.SeedSequence | np.random.Generator | None

# Stream identifiers under a (master, N, trial) key.
TARGET_STREAM = 0
ESTIMATOR_STREAM = 1


def child_sequence(master: int, *keys: int) -> np.random.SeedSequence:
    """Return the seed sequence for ``keys`` under ``master``."""
    return np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))


def as_sequence(seed: SeedLike) -> np.random.SeedSequence:
    """Coerce an int or SeedSequence into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(0, 2**63 - 1)))
    return np.random.SeedSequence(seed)


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Return a Generator; generators pass through untouched."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def seed_value(seq: np.random.SeedSequence) -> int:
    """A single 63-bit integer identifying ``seq``, used in records."""
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def derive(seq: np.random.SeedSequence, *keys: int) -> np.random.SeedSequence:
    """Child of ``seq`` at ``keys``; unlike ``spawn`` it does not depend on call order."""
    return np.random.SeedSequence(
        entropy=seq.entropy,
        spawn_key=tuple(seq.spawn_key) + tuple(int(k) for k in keys),
        pool_size=seq.pool_size,
    )
