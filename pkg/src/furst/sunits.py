"""Enumeration, counting and gaps of the set {a^u b^v <= M}"""

import heapq
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import log
from typing import Iterator, List, Optional, Sequence, Union

from . import config
from .base import (
    BaseObject,
    FloatField,
    IntegerField,
    ListField,
    StringField,
    class_decorator,
)
from .exceptions import DomainError, ResourceError
from .interval import certified_floor, fraction_to_iv
from .structure import SUnit, SUnitParams
from .validate import validate_choice_arg, validate_min_int_arg

logger = logging.getLogger(__name__)

QUADRANTS = ("nonneg", "positive")


@dataclass(frozen=True)
class LogBound:
    """The exact threshold t = ln M, decided by integer comparison"""

    M: int

    def __post_init__(self):
        validate_min_int_arg("M", self.M, 1)

    def __float__(self):
        return log(self.M)


def _column(params: SUnitParams, u: int, M: int) -> Iterator[SUnit]:
    value = params.a**u
    v = 0
    while value <= M:
        yield SUnit(u, v, value)
        value *= params.b
        v += 1


def iter_sigma(params: SUnitParams, M: int) -> Iterator[SUnit]:
    """Lazy ascending merge of one column of b-powers per power of a"""
    M = validate_min_int_arg("M", M, 1)
    columns = []
    u, head = 0, 1
    while head <= M:
        columns.append(_column(params, u, M))
        u += 1
        head *= params.a
    return heapq.merge(*columns, key=lambda unit: unit.value)


def enumerate_sigma(
    params: SUnitParams, M: int, budget: Optional[int] = None
) -> List[SUnit]:
    budget = budget or config.element_budget()
    result = []
    for unit in iter_sigma(params, M):
        if len(result) >= budget:
            raise ResourceError(
                f"Enumerating Σ({M}) for a={params.a}, b={params.b} "
                f"exceeds {budget} elements",
                budget,
            )
        result.append(unit)
    return result


def successor(params: SUnitParams, M: int) -> int:
    """Smallest element of Σ strictly greater than M"""
    best = None
    head = 1
    while True:
        value = head
        while value <= M:
            value *= params.b
        if best is None or value < best:
            best = value
        if head > M:
            break
        head *= params.a
    return best


def _max_exponent(base: int, limit: int) -> int:
    """Largest e >= 0 with base^e <= limit, or -1 when limit < 1"""
    if limit < 1:
        return -1
    e, value = 0, base
    while value <= limit:
        value *= base
        e += 1
    return e


@class_decorator
class CountResult(BaseObject):
    """Integer points under x ln a + y ln b <= t"""

    a = IntegerField()
    b = IntegerField()
    t = FloatField()
    quadrant = StringField()
    count = IntegerField()
    estimate = FloatField()

    _string_format = "{quadrant} count {count} vs estimate {estimate:.3f}"

    @property
    def relative_error(self) -> float:
        if not self.count:
            return 0.0
        return abs(self.count - self.estimate) / self.count


def two_term_estimate(params: SUnitParams, t: float) -> float:
    la, lb = log(params.a), log(params.b)
    return t * t / (2 * la * lb) - t * (1 / (2 * la) + 1 / (2 * lb))


def _count_log_bound(params: SUnitParams, M: int, positive: bool) -> int:
    count = 0
    start = 1 if positive else 0
    u, head = start, params.a**start
    while head <= M:
        top = _max_exponent(params.b, M // head)
        count += max(0, top - start + 1)
        u += 1
        head *= params.a
    return count


def _count_real(params: SUnitParams, t: Fraction, positive: bool) -> int:
    count = 0
    start = 1 if positive else 0
    x = start
    while True:

        def column_top(ctx, x=x):
            rest = fraction_to_iv(ctx, t) - x * ctx.log(params.a)
            return rest / ctx.log(params.b)

        top = certified_floor(column_top, what=f"column {x} of the lattice count")
        if top < start:
            break
        count += top - start + 1
        x += 1
    return count


def count_lattice(
    params: SUnitParams,
    t: Union[LogBound, float, Fraction, int],
    quadrant: str = "nonneg",
    budget: Optional[int] = None,
) -> CountResult:
    quadrant = validate_choice_arg("quadrant", quadrant, QUADRANTS)
    positive = quadrant == "positive"
    if isinstance(t, LogBound):
        count = _count_log_bound(params, t.M, positive)
        t_value = float(t)
    else:
        t = Fraction(t)
        if t < 0:
            raise DomainError(f"t must be nonnegative, got {t}")
        count = _count_real(params, t, positive)
        t_value = float(t)

    budget = budget or config.element_budget()
    if count > budget:
        raise ResourceError(f"Lattice count {count} exceeds the element budget", budget)

    return CountResult.build(
        a=params.a,
        b=params.b,
        t=t_value,
        quadrant=quadrant,
        count=count,
        estimate=two_term_estimate(params, t_value),
    )


@class_decorator
class GapReport(BaseObject):
    """Consecutive gaps of Σ(M), including the step to the first element beyond M"""

    a = IntegerField()
    b = IntegerField()
    M = IntegerField()
    beta = FloatField()
    points = ListField(IntegerField())
    gaps = ListField(IntegerField())
    successor = IntegerField()
    max_gap = IntegerField()
    argmax_lo = IntegerField()
    argmax_hi = IntegerField()
    normalized_constant = FloatField()

    _string_format = "max gap {max_gap} at ({argmax_lo}, {argmax_hi})"

    @property
    def pairs(self):
        return list(zip(self.points, self.gaps))


def gap_report(
    params: SUnitParams, M: int, beta: float, budget: Optional[int] = None
) -> GapReport:
    M = validate_min_int_arg("M", M, 2)
    if not beta > 2:
        raise DomainError(f"beta must exceed 2, got {beta}")

    points = [unit.value for unit in enumerate_sigma(params, M, budget)]
    after = successor(params, M)
    chain = points + [after]
    gaps = [hi - lo for lo, hi in zip(chain, chain[1:])]

    max_gap, argmax = 0, 0
    constant = 0.0
    for index, gap in enumerate(gaps):
        if gap > max_gap:
            max_gap, argmax = gap, index
        q = chain[index]
        if q > 1:
            constant = max(constant, gap / q * log(q) ** (1 / (beta - 1)))

    logger.debug("Gaps of Σ(%d): max %d at index %d", M, max_gap, argmax)
    return GapReport.build(
        a=params.a,
        b=params.b,
        M=M,
        beta=beta,
        points=points,
        gaps=gaps,
        successor=after,
        max_gap=max_gap,
        argmax_lo=chain[argmax],
        argmax_hi=chain[argmax + 1],
        normalized_constant=constant,
    )


@class_decorator
class GrowthRow(BaseObject):
    """Asymptotic ratios of |Σ(M)| against ln²M / (2 ln a ln b)"""

    M = IntegerField()
    count = IntegerField()
    positive_count = IntegerField()
    hla_ratio = FloatField()
    positive_ratio = FloatField()
    qnu_ratio = FloatField()

    _string_format = "M={M} |Σ|={count} ratio {hla_ratio:.4f}"


def growth_ratios(params: SUnitParams, Ms: Sequence[int]) -> List[GrowthRow]:
    la, lb = log(params.a), log(params.b)
    rows = []
    for M in Ms:
        M = validate_min_int_arg("M", M, 2)
        count = _count_log_bound(params, M, positive=False)
        positive = _count_log_bound(params, M, positive=True)
        leading = log(M) ** 2 / (2 * la * lb)
        # q_nu is the largest element, nu its 1-based index
        largest = max(
            params.a**u * params.b ** _max_exponent(params.b, M // params.a**u)
            for u in range(_max_exponent(params.a, M) + 1)
        )
        qnu = log(largest) / (2 * count * la * lb) ** 0.5
        rows.append(
            GrowthRow.build(
                M=M,
                count=count,
                positive_count=positive,
                hla_ratio=count / leading,
                positive_ratio=positive / leading,
                qnu_ratio=qnu,
            )
        )
    return rows
