"""Seed derivation.

A run has one 64-bit master seed. Trial ``t`` of suite ``s`` draws from
``SeedSequence(entropy=master, spawn_key=(crc32(s), t))`` so a trial's
stream never depends on which worker ran it or in what order.
"""
import zlib
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence]


def suite_code(suite: str) -> int:
    return zlib.crc32(suite.encode("utf-8"))


def derive_sequence(master: int, suite: str, trial: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master), spawn_key=(suite_code(suite), int(trial)))


def derive_seed(master: int, suite: str, trial: int = 0) -> int:
    """64-bit integer seed for one trial."""
    return int(derive_sequence(master, suite, trial).generate_state(1, dtype=np.uint64)[0])


def trial_rng(master: int, suite: str, trial: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_sequence(master, suite, trial))


def make_rng(seed: Union[SeedLike, np.random.Generator, None]) -> np.random.Generator:
    """Accept a seed, a seed sequence or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def shot_generator(seed: int) -> np.random.Generator:
    """Counter-based stream for Monte-Carlo shots; shot ``j`` uses row ``j`` of a block draw."""
    return np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))
