from fractions import Fraction

import pytest

from furst.exceptions import DomainError, ParameterError, ResourceError
from furst.structure import SUnit, SUnitParams
from furst.sunits import (
    LogBound,
    count_lattice,
    enumerate_sigma,
    gap_report,
    growth_ratios,
    iter_sigma,
    successor,
    two_term_estimate,
)

BETA = 5.116201


@pytest.mark.parametrize("a, b, M, expected", [
    (2, 3, 1, [1]),
    (2, 3, 10, [1, 2, 3, 4, 6, 8, 9]),
    (2, 5, 30, [1, 2, 4, 5, 8, 10, 16, 20, 25]),
    (3, 2, 10, [1, 2, 3, 4, 6, 8, 9]),
])
def test_enumerate_sigma(level, a, b, M, expected):
    units = enumerate_sigma(SUnitParams(a, b), M)
    assert [unit.value for unit in units] == expected
    assert all(unit.check(SUnitParams(a, b)) for unit in units)


def test_enumerate_sigma_size(level):
    assert len(enumerate_sigma(SUnitParams(2, 5), 100)) == 15


def test_enumerate_sigma_exponents(level, bases):
    units = enumerate_sigma(bases, 10)
    assert units[4] == SUnit(1, 1, 6)
    assert units[-1] == SUnit(0, 2, 9)


def test_iter_sigma_is_lazy(level, bases):
    stream = iter_sigma(bases, 10**30)
    assert [next(stream).value for _ in range(5)] == [1, 2, 3, 4, 6]


@pytest.mark.parametrize("a, b", [
    (2, 4),
    (6, 9),
    (1, 3),
    (2, 1),
])
def test_invalid_bases(level, a, b):
    with pytest.raises(ParameterError):
        SUnitParams(a, b)


def test_enumerate_sigma_budget(level, bases):
    with pytest.raises(ResourceError) as error:
        enumerate_sigma(bases, 100, budget=5)
    assert "FURST_ELEMENT_BUDGET" in error.value.help_message


def test_enumerate_sigma_rejects_zero(level, bases):
    with pytest.raises(DomainError):
        enumerate_sigma(bases, 0)


@pytest.mark.parametrize("M, expected", [
    (1, 2),
    (10, 12),
    (100, 108),
    (12, 16),
])
def test_successor(level, bases, M, expected):
    assert successor(bases, M) == expected


@pytest.mark.parametrize("quadrant, expected", [
    ("nonneg", 20),
    ("positive", 9),
])
def test_count_log_bound(level, bases, quadrant, expected):
    assert count_lattice(bases, LogBound(100), quadrant).count == expected


def test_count_matches_enumeration(level, bases):
    result = count_lattice(bases, LogBound(10**6))
    assert result.count == len(enumerate_sigma(bases, 10**6))


def test_count_two_term_estimate(level, bases):
    result = count_lattice(bases, LogBound(10**6), "positive")
    assert result.count == 110
    assert result.estimate == pytest.approx(109.07, abs=0.01)
    assert result.relative_error <= 0.10
    assert str(result).startswith("CountResult: positive count 110 vs estimate 109.0")


def test_count_rational_bound(level, bases):
    assert count_lattice(bases, Fraction(0)).count == 1
    assert count_lattice(bases, Fraction(0), "positive").count == 0


def test_count_negative_bound(level, bases):
    with pytest.raises(DomainError):
        count_lattice(bases, Fraction(-1))


def test_two_term_estimate_zero(level, bases):
    assert two_term_estimate(bases, 0.0) == 0.0


@pytest.mark.parametrize("M, max_gap, lo, hi", [
    (10, 3, 9, 12),
    (100, 15, 81, 96),
])
def test_gap_report(level, bases, M, max_gap, lo, hi):
    report = gap_report(bases, M, BETA)
    assert (report.max_gap, report.argmax_lo, report.argmax_hi) == (max_gap, lo, hi)


def test_gap_report_smallest(level, bases):
    report = gap_report(bases, 2, BETA)
    assert report.points == [1, 2]
    assert report.gaps == [1, 1]
    assert report.successor == 3
    assert report.pairs == [(1, 1), (2, 1)]


@pytest.mark.parametrize("M, beta", [
    (1, BETA),
    (10, 2.0),
])
def test_gap_report_errors(level, bases, M, beta):
    with pytest.raises(DomainError):
        gap_report(bases, M, beta)


def test_growth_ratios(level, bases):
    rows = growth_ratios(bases, [10**k for k in range(6, 13)])
    for row in rows:
        assert 0.7 <= row.positive_ratio <= 1.0
        assert row.hla_ratio > 1.0
    assert rows[-1].positive_ratio > rows[0].positive_ratio
    assert rows[0].count == 142
