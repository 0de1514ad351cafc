"""Δ-nets from differences of fractional parts and the leading-digit sets"""

import logging
from fractions import Fraction
from math import log
from typing import Iterable, Optional

from . import config
from .base import (
    AngleField,
    BaseObject,
    BooleanField,
    FloatField,
    FractionField,
    IntegerField,
    ListField,
    class_decorator,
)
from .circle import dispersion, min_positive_gap, sigma_alpha_witnesses
from .exceptions import (
    ConsistencyError,
    DegenerateInputError,
    DomainError,
    PreconditionError,
)
from .structure import Angle, DigitSet, PointSet, SUnitParams
from .sunits import enumerate_sigma, successor
from .validate import validate_min_int_arg

logger = logging.getLogger(__name__)


@class_decorator
class NetReport(BaseObject):
    """One run of the Δ-net construction"""

    a = IntegerField()
    b = IntegerField()
    alpha = AngleField()
    M = IntegerField()
    M1 = IntegerField()
    eta_hi = AngleField()
    eta_lo = AngleField()
    q_hi = IntegerField()
    q_lo = IntegerField()
    gap = FractionField()
    inv_gap = FractionField()
    k = IntegerField()
    successor = IntegerField()
    d_gap = IntegerField()
    delta = FractionField()
    net = ListField(AngleField())
    dispersion = FractionField()
    sigma_count = IntegerField()
    point_count = IntegerField()
    pigeonhole_ok = BooleanField()
    window_ok = BooleanField()
    ed_bound = FloatField()

    _string_format = "d={inv_gap} k={k} D_d={d_gap} Δ={delta}"

    @property
    def params(self) -> SUnitParams:
        return SUnitParams(self.a, self.b)


def _net_points(gap: Fraction, qs: Iterable[int]) -> PointSet:
    points = set()
    for q in qs:
        step = q * gap
        points.add(Angle.from_fraction(step))
        points.add(Angle.from_fraction(1 - step))
    return PointSet.from_iterable(points)


def ed_bound(
    M: int, beta: Optional[float] = None, eps: Optional[float] = None
) -> Optional[float]:
    """1 / (log log M)^(1/(β-1) - ε), undefined until log log M > 1"""
    beta = beta or config.main_config.getfloat("pipeline", "beta")
    eps = config.main_config.getfloat("pipeline", "eps") if eps is None else eps
    if M < 3:
        return None
    loglog = log(log(M))
    if loglog <= 1:
        return None
    return 1 / loglog ** (1 / (beta - 1) - eps)


def build_net(
    params: SUnitParams,
    alpha: Angle,
    M: int,
    allow_collisions: bool = False,
    budget: Optional[int] = None,
) -> NetReport:
    M = validate_min_int_arg("M", M, 1)
    Q = alpha.den
    if M >= Q and not allow_collisions:
        raise PreconditionError(f"The net needs M < Q, got M={M}, Q={Q}")

    sigma_count = len(enumerate_sigma(params, M, budget))
    if sigma_count < 2:
        raise DegenerateInputError(f"Σ({M}) has fewer than two elements")
    witnesses = sigma_alpha_witnesses(params, M, alpha, budget)
    points = PointSet.from_iterable(witnesses)
    if len(points) < 2:
        raise DegenerateInputError(f"Σ_α({M}) collapses to a single point")

    eta_hi, eta_lo, gap = min_positive_gap(points)
    inv_gap = 1 / gap
    if gap < Fraction(1, Q) or inv_gap > Q:
        raise ConsistencyError(f"Gap {gap} is below 1/Q")
    # pigeonhole over the n-1 inner gaps of n points in [0, 1)
    if not gap < Fraction(1, len(points) - 1):
        raise ConsistencyError(f"Minimal gap {gap} breaks the pigeonhole bound")

    top = inv_gap.numerator // inv_gap.denominator
    qs = [unit.value for unit in enumerate_sigma(params, top, budget)]
    after = successor(params, top)
    chain = qs + [after]
    d_gap = max(hi - lo for lo, hi in zip(chain, chain[1:]))
    delta = d_gap * gap

    net = _net_points(gap, qs)
    measured = dispersion(net, "interval")
    if measured > delta:
        raise ConsistencyError(f"Net dispersion {measured} exceeds Δ={delta}")

    logger.info(
        "Net for α=%s, M=%d: d=%s, k=%d, D_d=%d, Δ=%s",
        alpha,
        M,
        inv_gap,
        len(qs),
        d_gap,
        delta,
    )
    return NetReport.build(
        a=params.a,
        b=params.b,
        alpha=alpha,
        M=M,
        M1=M * Q,
        eta_hi=eta_hi,
        eta_lo=eta_lo,
        q_hi=witnesses[eta_hi],
        q_lo=witnesses[eta_lo],
        gap=gap,
        inv_gap=inv_gap,
        k=len(qs),
        successor=after,
        d_gap=d_gap,
        delta=delta,
        net=list(net),
        dispersion=measured,
        sigma_count=sigma_count,
        point_count=len(points),
        pigeonhole_ok=gap <= Fraction(1, len(points)),
        window_ok=len(points) <= inv_gap <= Q,
        ed_bound=ed_bound(M),
    )


@class_decorator
class DifferenceWitness(BaseObject):
    """η_j rebuilt from the two Σ-elements that produce it"""

    j = IntegerField()
    q_j = IntegerField()
    hi_product = IntegerField()
    lo_product = IntegerField()
    value = AngleField()
    within_m1 = BooleanField()
    ok = BooleanField()

    _string_format = "η_{j} = {{{hi_product}α}} - {{{lo_product}α}} ok={ok}"


def difference_witness(report: NetReport, j: int) -> DifferenceWitness:
    """Recomputes the j-th net step from (q_j, q', q'')"""
    top = report.inv_gap.numerator // report.inv_gap.denominator
    qs = [unit.value for unit in enumerate_sigma(report.params, top)]
    if not 0 <= j < len(qs):
        raise DomainError(f"Net index {j} out of range 0..{len(qs) - 1}")
    q_j = qs[j]
    hi_product, lo_product = q_j * report.q_hi, q_j * report.q_lo
    value = report.alpha.scale(hi_product) - report.alpha.scale(lo_product)
    expected = Angle.from_fraction(q_j * report.gap)
    return DifferenceWitness.build(
        j=j,
        q_j=q_j,
        hi_product=hi_product,
        lo_product=lo_product,
        value=value,
        within_m1=max(hi_product, lo_product) <= report.M1,
        ok=value == expected,
    )


def choose_n(delta: Fraction, a: int) -> int:
    """Largest n >= 0 with a^n <= 1/Δ"""
    delta = Fraction(delta)
    if delta <= 0:
        raise DomainError(f"Δ must be positive, got {delta}")
    if delta > 1:
        raise DomainError(f"Δ must be at most 1, got {delta}")
    n = 0
    while a ** (n + 1) * delta <= 1:
        n += 1
    return n


def digit_set_from_points(
    points: Iterable[Angle], a: int, n: int, source_bound=None
) -> DigitSet:
    modulus = a**n
    residues = {p.num * modulus // p.den for p in points}
    return DigitSet(a, n, tuple(residues), source_bound)


def digit_set(
    params: SUnitParams, alpha: Angle, M1: int, n: int, budget: Optional[int] = None
) -> DigitSet:
    n = validate_min_int_arg("n", n, 0)
    witnesses = sigma_alpha_witnesses(params, M1, alpha, budget)
    return digit_set_from_points(witnesses, params.a, n, source_bound=M1)


@class_decorator
class Lemma2Check(BaseObject):
    """Advisory |X_n| >= sqrt(a^n) / 2"""

    a = IntegerField()
    n = IntegerField()
    X_n = IntegerField()
    threshold = FloatField()
    passed = BooleanField()

    _string_format = "X_n={X_n} threshold={threshold} pass={passed}"


def lemma2_record(x_n: int, a: int, n: int) -> Lemma2Check:
    return Lemma2Check.build(
        a=a,
        n=n,
        X_n=x_n,
        threshold=(a**n) ** 0.5 / 2,
        passed=4 * x_n * x_n >= a**n,
    )


def verify_lemma2(report: NetReport, ds: DigitSet) -> Lemma2Check:
    if ds.a != report.a:
        raise ConsistencyError(
            f"Digit set base {ds.a} does not match the net base {report.a}"
        )
    expected_n = choose_n(min(report.delta, Fraction(1)), report.a)
    if ds.n != expected_n:
        raise ConsistencyError(f"Digit set has n={ds.n}, the net gives n={expected_n}")
    if ds.source_bound is not None and ds.source_bound != report.M1:
        raise ConsistencyError(
            f"Digit set built from Σ({ds.source_bound}), expected M1={report.M1}"
        )
    record = lemma2_record(len(ds), ds.a, ds.n)
    if not record.passed:
        logger.info("Digit set bound not reached: %s", record)
    return record
