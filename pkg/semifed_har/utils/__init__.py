"""Utility helpers shared across the simulator."""

from semifed_har.utils.numbers import round_half_up
from semifed_har.utils.seeding import Stream, rng_for

__all__ = [
    "round_half_up",
    "Stream",
    "rng_for",
]
