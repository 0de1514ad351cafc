from fractions import Fraction

import pytest

from furst.alpha import (
    RealSpec,
    baker_probe,
    cf_expand,
    convergents,
    dirichlet_approx,
    psi_bad_witness,
)
from furst.exceptions import DomainError
from furst.structure import PsiSpec

SQRT2_MINUS_1 = RealSpec.from_cf([0, 2], period_from=1)
GOLDEN_MINUS_1 = RealSpec.from_cf([0, 1], period_from=1)
LOG2_LOG3 = RealSpec.from_log_ratio(2, 3)


@pytest.mark.parametrize("value, expected", [
    (Fraction(5, 7), [0, 1, 2, 2]),
    (Fraction(3), [3]),
    (Fraction(-1, 2), [-1, 2]),
    (Fraction(355, 113), [3, 7, 16]),
])
def test_cf_expand(level, value, expected):
    assert cf_expand(value) == expected


@pytest.mark.parametrize("text, kind, rational", [
    ("3/7", "rational", True),
    ('{"rational": "1/2"}', "rational", True),
    ('{"cf": [0, 2], "period_from": 1}', "cf", False),
    ('{"cf": [0, 1, 2, 2]}', "cf", True),
    ('{"decimal": "0.4142135623730950488", "bits": 128}', "decimal", False),
    ('{"log_ratio": [2, 3]}', "log_ratio", False),
])
def test_real_spec_from_string(level, text, kind, rational):
    spec = RealSpec.from_string(text)
    assert spec.kind == kind
    assert spec.is_rational == rational
    assert RealSpec.from_json(spec.to_json()) == spec


def test_real_spec_exact_value(level):
    assert RealSpec.from_cf([0, 1, 2, 2]).exact_value == Fraction(5, 7)
    with pytest.raises(DomainError):
        SQRT2_MINUS_1.exact_value


@pytest.mark.parametrize("data", [
    {"cf": []},
    {"cf": [0, 0]},
    {"cf": [0, 2], "period_from": 2},
    {"decimal": "0.5", "bits": 32},
    {"log_ratio": [2, 4]},
    {"unknown": 1},
])
def test_real_spec_errors(level, data):
    with pytest.raises(Exception) as error:
        RealSpec.from_json(data)
    assert error.type.__name__ in ("DomainError", "ParameterError")


def test_periodic_quotients(level):
    spec = RealSpec.from_cf([1, 1, 2], period_from=1)
    assert [spec.quotient(i) for i in range(6)] == [1, 1, 2, 1, 2, 1]


def test_enclosures(level):
    sqrt2 = SQRT2_MINUS_1.enclosure(128)
    assert Fraction(41421356237, 10**11) < sqrt2.lo <= sqrt2.hi < Fraction(41421356238, 10**11)
    assert sqrt2.width < Fraction(1, 2**128)
    decimal = RealSpec.from_decimal("0.25", 64).enclosure(64)
    assert decimal.contains(Fraction(1, 4))
    assert decimal.radius == Fraction(1, 200)


def test_convergents_log_ratio(level):
    found = convergents(LOG2_LOG3, 20)
    assert [str(c) for c in found][-3:] == ["2/3", "5/8", "12/19"]


def test_convergents_rational(level):
    found = convergents(RealSpec.from_rational(Fraction(5, 7)), 100)
    assert [str(c) for c in found] == ["0/1", "1/1", "2/3", "5/7"]


def test_convergents_repeat_denominator(level):
    found = convergents(GOLDEN_MINUS_1, 10)
    assert [c.q for c in found] == [1, 1, 2, 3, 5, 8]


@pytest.mark.parametrize("x, N, expected", [
    (SQRT2_MINUS_1, 1000, (408, 985)),
    (GOLDEN_MINUS_1, 100, (55, 89)),
    (LOG2_LOG3, 20, (12, 19)),
])
def test_dirichlet_approx(level, x, N, expected):
    A, Q = dirichlet_approx(x, N)
    assert (A, Q) == expected
    error = abs(x.enclosure(256) - Fraction(A, Q))
    assert error.hi <= Fraction(1, Q * N)


def test_psi_bad_witness_golden(level):
    witness = psi_bad_witness(GOLDEN_MINUS_1, PsiSpec(Fraction(1, 5)), 10**4)
    assert witness.ok
    assert witness.Q == 6765
    assert witness.psi_inverse == pytest.approx(2000)
    assert witness.in_window


def test_psi_bad_witness_violation(level):
    witness = psi_bad_witness(SQRT2_MINUS_1, PsiSpec(Fraction(1, 2)), 1000)
    assert not witness.ok
    assert witness.violation_q == 1


def test_psi_bad_witness_fractional_power(level):
    witness = psi_bad_witness(SQRT2_MINUS_1, PsiSpec(Fraction(3, 10), Fraction(3, 2)), 1000)
    assert witness.ok
    assert witness.Q == 985


def test_baker_probe(level, bases):
    probe = baker_probe(bases, 5.116201, 1000)
    assert probe.c0_certified_positive
    assert probe.c0 > 0
    assert probe.argmin_q in [row.q for row in probe.rows]
    assert [row.q for row in probe.rows][:6] == [1, 1, 2, 3, 8, 19]
    for row, following in zip(probe.rows, probe.rows[1:]):
        assert row.next_q == following.q
