"""Small numeric helpers shared by several modules."""

import math


def round_half_away(x: float) -> int:
    """Round to the nearest integer with halves going away from zero.

    Python's built-in round() rounds halves to even, which is the wrong
    convention for subset sizing and pixel quantization here.
    """
    if x >= 0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


def clamp(x: float, lo: float, hi: float) -> float:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x
