from fractions import Fraction

import pytest

from furst import interval
from furst.exceptions import DomainError, PrecisionError
from furst.interval import (
    Enclosure,
    certified_ceil,
    certified_floor,
    certified_floor_power,
    distance_to_integer,
    from_iv,
    interval_context,
    log_ratio,
    power_le,
    retry_precision,
)


def test_enclosure_arithmetic(level):
    left = Enclosure(Fraction(1, 3), Fraction(1, 2))
    right = Enclosure.point(Fraction(1, 4))
    assert left + right == Enclosure(Fraction(7, 12), Fraction(3, 4))
    assert left - right == Enclosure(Fraction(1, 12), Fraction(1, 4))
    assert left * -2 == Enclosure(Fraction(-1), Fraction(-2, 3))
    assert 1 - left == Enclosure(Fraction(1, 2), Fraction(2, 3))
    assert abs(Enclosure(Fraction(-1), Fraction(1, 2))) == Enclosure(0, 1)
    assert left.midpoint == Fraction(5, 12)
    assert left.radius == Fraction(1, 12)


def test_enclosure_empty(level):
    with pytest.raises(DomainError):
        Enclosure(1, 0)


def test_enclosure_no_interval_products(level):
    with pytest.raises(TypeError):
        Enclosure(0, 1) * Enclosure(0, 1)


@pytest.mark.parametrize("lo, hi, expected", [
    (Fraction(3, 2), Fraction(7, 4), 1),
    (Fraction(-1, 2), Fraction(-1, 4), -1),
    (Fraction(9, 10), Fraction(11, 10), None),
])
def test_enclosure_floor(level, lo, hi, expected):
    assert Enclosure(lo, hi).floor() == expected


@pytest.mark.parametrize("lo, hi, low, high", [
    (Fraction(1, 10), Fraction(1, 5), Fraction(1, 10), Fraction(1, 5)),
    (Fraction(9, 10), Fraction(11, 10), 0, Fraction(1, 10)),
    (Fraction(2, 5), Fraction(3, 5), Fraction(2, 5), Fraction(1, 2)),
    (Fraction(0), Fraction(3), 0, Fraction(1, 2)),
])
def test_enclosure_norm(level, lo, hi, low, high):
    assert Enclosure(lo, hi).norm() == Enclosure(low, high)


def test_enclosure_comparisons(level):
    small = Enclosure(0, Fraction(1, 3))
    assert small.certainly_lt(Fraction(1, 2))
    assert small.certainly_le(Fraction(1, 3))
    assert not small.certainly_lt(Enclosure(Fraction(1, 4), 1))
    assert Enclosure(2, 3).certainly_gt(small)


@pytest.mark.parametrize("value, expected", [
    (Fraction(7, 3), Fraction(1, 3)),
    (Fraction(-1, 4), Fraction(1, 4)),
    (Fraction(1, 2), Fraction(1, 2)),
    (5, 0),
])
def test_distance_to_integer(level, value, expected):
    assert distance_to_integer(value) == expected


def test_from_iv_is_outward(level):
    ctx = interval_context(64)
    third = from_iv(ctx.mpf(1) / 3)
    assert third.lo < Fraction(1, 3) < third.hi
    assert third.width < Fraction(1, 2**60)
    assert from_iv(ctx.mpf(3)) == Enclosure.point(3)


def test_log_ratio(level):
    enclosure = log_ratio(2, 3, 128)
    assert Fraction(6309297535714574, 10**16) < enclosure.lo
    assert enclosure.hi < Fraction(6309297535714575, 10**16)
    assert enclosure.width < Fraction(1, 2**100)


def test_certified_floor(level):
    assert certified_floor(lambda ctx: ctx.sqrt(2) * 10**6) == 1414213
    assert certified_ceil(lambda ctx: ctx.log(3) / ctx.log(2)) == 2


def test_retry_precision_doubles(level):
    seen = []

    def action(bits):
        seen.append(bits)
        if bits < 200:
            raise PrecisionError("not yet", 0)
        return bits

    assert retry_precision(action, 64) == 256
    assert seen == [64, 128, 256]


def test_retry_precision_honours_request(level):
    seen = []

    def action(bits):
        seen.append(bits)
        if len(seen) == 1:
            raise PrecisionError("jump", 1000)
        return bits

    assert retry_precision(action, 64) == 1000
    assert seen == [64, 1000]


@pytest.mark.parametrize("base, exponent, expected", [
    (101, Fraction(1, 2), 10),
    (100, Fraction(1, 2), 10),
    (10**6, Fraction(1, 2), 1000),
    (101, Fraction(3, 2), 1015),
    (7, 0, 1),
])
def test_certified_floor_power(level, base, exponent, expected):
    assert certified_floor_power(base, exponent) == expected


def test_certified_floor_power_domain(level):
    with pytest.raises(DomainError):
        certified_floor_power(10, Fraction(-1, 2))


@pytest.mark.parametrize("value, base, exponent, expected", [
    (10201, 101, 2, True),
    (10202, 101, 2, False),
    (1000, 10**6, Fraction(1, 2), True),
    (1001, 10**6, Fraction(1, 2), False),
    (0, 5, 1, True),
])
def test_power_le(level, value, base, exponent, expected):
    assert power_le(value, base, exponent) is expected


def test_precision_limit(level, mocker):
    mocker.patch.object(interval.config, "max_bits", return_value=128)

    def action(bits):
        raise PrecisionError("never", 0)

    with pytest.raises(PrecisionError) as error:
        retry_precision(action, 64)
    assert error.value.required_bits == 256
