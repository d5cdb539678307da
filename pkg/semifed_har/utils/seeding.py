"""
Keyed random streams.

Every random decision in a simulation draws from a generator keyed by
(seed, purpose, *keys), so clients can be run in any order or in parallel
and still see identical randomness.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Purposes a random stream can be drawn for."""
    INIT = 0
    SYNTH = 1
    LABEL_SUBSET = 2
    PARTITION = 3
    SELECTION = 4
    CLIENT_TRAIN = 5
    SERVER_TRAIN = 6
    PSEUDO_LABEL = 7
    BENCH = 8


def rng_for(seed: int, purpose: Stream, *keys: int) -> np.random.Generator:
    """Return a generator deterministically derived from ``seed``, ``purpose`` and ``keys``."""
    entropy = [int(seed) & 0xFFFFFFFF, int(purpose)] + [int(k) & 0xFFFFFFFF for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
