from fractions import Fraction

import pytest

from furst.circle import (
    dispersion,
    frac_mul,
    min_positive_gap,
    nearest_distance,
    norm,
    sigma_alpha,
    sigma_alpha_witnesses,
)
from furst.exceptions import DomainError
from furst.structure import Angle, PointSet


def points(*values):
    return PointSet.from_iterable(Angle.from_fraction(Fraction(v)) for v in values)


@pytest.mark.parametrize("value, expected", [
    (Fraction(3, 4), Fraction(1, 4)),
    (Fraction(-1, 3), Fraction(1, 3)),
    (Fraction(7, 2), Fraction(1, 2)),
    (Angle(1, 2), Fraction(1, 2)),
    (5, Fraction(0)),
])
def test_norm(level, value, expected):
    assert norm(value) == expected


def test_frac_mul(level):
    assert frac_mul(7, Angle(2, 5)) == Angle(4, 5)


def test_sigma_alpha_collisions(level, bases):
    result = sigma_alpha(bases, 10, Angle(1, 5))
    assert [str(p) for p in result] == ["1/5", "2/5", "3/5", "4/5"]


def test_sigma_alpha_witnesses_smallest_q(level, bases):
    witnesses = sigma_alpha_witnesses(bases, 10, Angle(1, 5))
    assert witnesses[Angle(1, 5)] == 1
    assert witnesses[Angle(3, 5)] == 3
    assert witnesses[Angle(4, 5)] == 4


@pytest.mark.parametrize("values, metric, expected", [
    (["1/5", "2/5", "3/5", "4/5"], "interval", Fraction(1, 5)),
    (["1/5", "2/5", "3/5", "4/5"], "circular", Fraction(1, 5)),
    (["0"], "interval", Fraction(1)),
    (["0"], "circular", Fraction(1, 2)),
    (["1/10", "9/10"], "interval", Fraction(2, 5)),
    (["1/10", "9/10"], "circular", Fraction(2, 5)),
])
def test_dispersion(level, values, metric, expected):
    assert dispersion(points(*values), metric) == expected


def test_dispersion_errors(level):
    with pytest.raises(DomainError):
        dispersion(PointSet(), "interval")
    with pytest.raises(DomainError):
        dispersion(points("1/2"), "euclidean")


def test_nearest_distance(level):
    assert nearest_distance(points("1/5", "2/5", "3/5", "4/5"), Fraction(1, 2)) == Fraction(1, 10)
    assert nearest_distance(points("1/5"), 1) == Fraction(4, 5)


def test_min_positive_gap(level):
    hi, lo, gap = min_positive_gap(points("0", "1/2", "3/5"))
    assert (hi, lo, gap) == (Angle(3, 5), Angle(1, 2), Fraction(1, 10))


def test_min_positive_gap_ties(level):
    hi, lo, gap = min_positive_gap(points("0", "1/4", "1/2"))
    assert lo == Angle(0)
    assert gap == Fraction(1, 4)


def test_min_positive_gap_needs_two_points(level):
    with pytest.raises(DomainError):
        min_positive_gap(points("1/3"))
