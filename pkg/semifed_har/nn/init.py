"""Parameter initialisation."""

from typing import Sequence

import numpy as np


def glorot_uniform(
    rng: np.random.Generator,
    shape: Sequence[int],
    fan_in: int,
    fan_out: int,
    dtype=np.float32,
) -> np.ndarray:
    """Uniform draw in ±sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=tuple(shape)).astype(dtype)


def zeros(shape: Sequence[int], dtype=np.float32) -> np.ndarray:
    return np.zeros(tuple(shape), dtype=dtype)


def ones(shape: Sequence[int], dtype=np.float32) -> np.ndarray:
    return np.ones(tuple(shape), dtype=dtype)
