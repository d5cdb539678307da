"""Numeric helpers."""

import math


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero for positive values."""
    # 1e-9 absorbs binary representation error, e.g. 100 * 0.035
    return int(math.floor(value + 0.5 + 1e-9))
