"""Exact arithmetic on the circle R/Z"""

from fractions import Fraction
from typing import Dict, Optional, Tuple

from .exceptions import DomainError
from .interval import distance_to_integer
from .structure import Angle, PointSet, SUnitParams
from .sunits import enumerate_sigma
from .validate import validate_choice_arg, validate_min_int_arg

METRICS = ("interval", "circular")


def frac_mul(q: int, alpha: Angle) -> Angle:
    return alpha.scale(q)


def norm(x) -> Fraction:
    """||x||, the distance to the nearest integer"""
    if isinstance(x, Angle):
        x = x.value
    return distance_to_integer(x)


def sigma_alpha_witnesses(
    params: SUnitParams, M: int, alpha: Angle, budget: Optional[int] = None
) -> Dict[Angle, int]:
    """Each point of Σ_α(M) with the smallest q producing it"""
    witnesses = {}
    for unit in enumerate_sigma(params, M, budget):
        witnesses.setdefault(frac_mul(unit.value, alpha), unit.value)
    return witnesses


def sigma_alpha(
    params: SUnitParams, M: int, alpha: Angle, budget: Optional[int] = None
) -> PointSet:
    M = validate_min_int_arg("M", M, 1)
    return PointSet.from_iterable(sigma_alpha_witnesses(params, M, alpha, budget))


def dispersion(points: PointSet, metric: str = "interval") -> Fraction:
    metric = validate_choice_arg("metric", metric, METRICS)
    if not len(points):
        raise DomainError("Dispersion of an empty point set is undefined")
    values = [p.value for p in points]
    inner = max((hi - lo for lo, hi in zip(values, values[1:])), default=Fraction(0))
    if metric == "interval":
        return max(values[0], 1 - values[-1], inner / 2)
    wrap = 1 - values[-1] + values[0]
    return max(inner, wrap) / 2


def nearest_distance(points: PointSet, z) -> Fraction:
    """Distance from z in [0, 1] to the closest point, interval metric"""
    if not len(points):
        raise DomainError("Empty point set")
    z = Fraction(z)
    return min(abs(z - p.value) for p in points)


def min_positive_gap(points: PointSet) -> Tuple[Angle, Angle, Fraction]:
    """Adjacent pair with the smallest difference, smallest lower end on ties"""
    if len(points) < 2:
        raise DomainError("Need at least two points for a gap")
    best = None
    for lo, hi in zip(points, points[1:]):
        gap = hi.value - lo.value
        if best is None or gap < best[2]:
            best = (hi, lo, gap)
    return best
