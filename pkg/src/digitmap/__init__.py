"""Iterated digit maps: cycles, consecutive u-integers and their witnesses."""

import sys

if hasattr(sys, "set_int_max_str_digits"):
    # witnesses routinely exceed the default 4300-digit conversion limit
    sys.set_int_max_str_digits(0)

from .core import CycleAtlas, Classification, DigitMap, DigitMapError, are_concurrent, classify, compute_atlas, threshold
from .hypotheses import PremiseError, check_premises, construct_g, pan_condition, power_map
from .sparse import SparseNumber

__all__ = [
    "Classification",
    "CycleAtlas",
    "DigitMap",
    "DigitMapError",
    "PremiseError",
    "SparseNumber",
    "are_concurrent",
    "check_premises",
    "classify",
    "compute_atlas",
    "construct_g",
    "pan_condition",
    "power_map",
    "threshold",
]
