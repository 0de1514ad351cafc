"""Exact rational enclosures backed by mpmath interval arithmetic

Every irrational quantity that influences a decision (a floor, a comparison,
a partial quotient) is carried as an `Enclosure` with exact `Fraction`
endpoints. mpmath computes outward-rounded intervals and their endpoints are
converted exactly, so no decision ever rests on a rounded float.

"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Callable, Optional, TypeVar, Union

from mpmath.ctx_iv import MPIntervalContext
from sympy import integer_nthroot

from . import config
from .exceptions import DomainError, PrecisionError

logger = logging.getLogger(__name__)

T = TypeVar("T")
Exact = Union[int, Fraction]


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.hi < self.lo:
            raise DomainError(f"Empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: Exact) -> "Enclosure":
        return cls(Fraction(value), Fraction(value))

    @classmethod
    def around(cls, center: Exact, radius: Exact) -> "Enclosure":
        return cls(Fraction(center) - radius, Fraction(center) + radius)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def radius(self) -> Fraction:
        return self.width / 2

    def contains(self, value: Exact) -> bool:
        return self.lo <= value <= self.hi

    def __add__(self, other: Union["Enclosure", Exact]) -> "Enclosure":
        other = as_enclosure(other)
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other: Union["Enclosure", Exact]) -> "Enclosure":
        return self + (-as_enclosure(other))

    def __rsub__(self, other: Exact) -> "Enclosure":
        return as_enclosure(other) - self

    def __mul__(self, scale: Exact) -> "Enclosure":
        if isinstance(scale, Enclosure):
            raise TypeError("Only exact scaling of enclosures is supported")
        scale = Fraction(scale)
        if scale >= 0:
            return Enclosure(self.lo * scale, self.hi * scale)
        return Enclosure(self.hi * scale, self.lo * scale)

    __rmul__ = __mul__

    def __abs__(self) -> "Enclosure":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(Fraction(0), max(-self.lo, self.hi))

    def floor(self) -> Optional[int]:
        """The common floor of both endpoints, None when undecided"""
        low = floor(self.lo)
        if low == floor(self.hi):
            return low
        return None

    def ceil(self) -> Optional[int]:
        high = ceil(self.hi)
        if high == ceil(self.lo):
            return high
        return None

    def norm(self) -> "Enclosure":
        """Enclosure of the distance to the nearest integer"""
        if self.width >= 1:
            return Enclosure(Fraction(0), Fraction(1, 2))
        half = Fraction(1, 2)
        at_lo = distance_to_integer(self.lo)
        at_hi = distance_to_integer(self.hi)
        if ceil(self.lo) <= self.hi:
            low = Fraction(0)
        else:
            low = min(at_lo, at_hi)
        if ceil(self.lo - half) <= self.hi - half:
            high = half
        else:
            high = max(at_lo, at_hi)
        return Enclosure(low, high)

    def certainly_lt(self, other: Union["Enclosure", Exact]) -> bool:
        return self.hi < as_enclosure(other).lo

    def certainly_le(self, other: Union["Enclosure", Exact]) -> bool:
        return self.hi <= as_enclosure(other).lo

    def certainly_gt(self, other: Union["Enclosure", Exact]) -> bool:
        return self.lo > as_enclosure(other).hi

    def to_iv(self, ctx: MPIntervalContext):
        lo = fraction_to_iv(ctx, self.lo)
        if self.is_point:
            return lo
        return lo + ctx.mpf([0, 1]) * fraction_to_iv(ctx, self.width)

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def as_enclosure(value: Union[Enclosure, Exact]) -> Enclosure:
    if isinstance(value, Enclosure):
        return value
    return Enclosure.point(value)


def distance_to_integer(value: Exact) -> Fraction:
    value = Fraction(value)
    part = value - floor(value)
    return min(part, 1 - part)


def interval_context(bits: Optional[int] = None) -> MPIntervalContext:
    """A fresh interval context, never shared between calls"""
    ctx = MPIntervalContext()
    ctx.prec = bits or config.default_bits()
    return ctx


def fraction_to_iv(ctx: MPIntervalContext, value: Exact):
    value = Fraction(value)
    if value.denominator == 1:
        return ctx.mpf(value.numerator)
    return ctx.mpf(value.numerator) / value.denominator


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp, bc = raw
    man = int(man)
    if not man:
        if exp or bc:
            raise PrecisionError("Interval endpoint is not finite", 0)
        return Fraction(0)
    if exp >= 0:
        value = Fraction(man << exp)
    else:
        value = Fraction(man, 1 << -exp)
    return -value if sign else value


def from_iv(value) -> Enclosure:
    """Exact enclosure from the outward-rounded endpoints of an mpmath interval"""
    lo_raw, hi_raw = value._mpi_
    return Enclosure(_raw_to_fraction(lo_raw), _raw_to_fraction(hi_raw))


def next_bits(bits: int) -> int:
    return bits * 2


def retry_precision(action: Callable[[int], T], bits: Optional[int] = None) -> T:
    """Runs action(bits), doubling the precision on PrecisionError"""
    bits = bits or config.default_bits()
    limit = config.max_bits()
    while True:
        try:
            return action(bits)
        except PrecisionError as error:
            wanted = max(next_bits(bits), error.required_bits)
            if wanted > limit:
                raise PrecisionError(
                    f"Precision limit of {limit} bits reached", wanted, inner=error
                ) from error
            logger.debug("Retrying at %d bits: %s", wanted, error.message)
            bits = wanted


def certified_enclosure(compute: Callable, bits: Optional[int] = None) -> Enclosure:
    return from_iv(compute(interval_context(bits)))


def certified_floor(
    compute: Callable, bits: Optional[int] = None, what: str = "value"
) -> int:
    """Floor of an interval expression, refined until it is decided"""

    def attempt(current_bits: int) -> int:
        result = certified_enclosure(compute, current_bits).floor()
        if result is None:
            raise PrecisionError(
                f"Cannot decide the floor of {what}", next_bits(current_bits)
            )
        return result

    return retry_precision(attempt, bits)


def certified_ceil(
    compute: Callable, bits: Optional[int] = None, what: str = "value"
) -> int:
    def attempt(current_bits: int) -> int:
        result = certified_enclosure(compute, current_bits).ceil()
        if result is None:
            raise PrecisionError(
                f"Cannot decide the ceiling of {what}", next_bits(current_bits)
            )
        return result

    return retry_precision(attempt, bits)


def log_ratio(a: int, b: int, bits: Optional[int] = None) -> Enclosure:
    """Enclosure of log a / log b"""
    return certified_enclosure(lambda ctx: ctx.log(a) / ctx.log(b), bits)


def certified_floor_power(base: int, exponent: Exact) -> int:
    """floor(base^exponent) for a rational exponent, in integer arithmetic"""
    exponent = Fraction(exponent)
    if base < 1 or exponent < 0:
        raise DomainError(f"Need base >= 1 and exponent >= 0, got {base}, {exponent}")
    root, _ = integer_nthroot(base**exponent.numerator, exponent.denominator)
    return int(root)


def power_le(value: int, base: int, exponent: Exact) -> bool:
    """value <= base^exponent, decided exactly"""
    exponent = Fraction(exponent)
    if exponent < 0:
        raise DomainError(f"Exponent must be nonnegative, got {exponent}")
    if value <= 0:
        return True
    return value**exponent.denominator <= base**exponent.numerator
