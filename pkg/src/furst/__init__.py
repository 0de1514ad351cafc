"""Desk-scale effective Furstenberg density toolkit"""

__version__ = "0.1.0"

from .structure import Angle, DigitSet, PointSet, SUnit, SUnitParams
