"""Projections, strata and the combinatorial search over digit sets"""

import logging
from fractions import Fraction
from math import ceil, log
from typing import Dict, List, Optional

from . import config
from .base import (
    AngleField,
    BaseObject,
    BooleanField,
    FloatField,
    IntegerField,
    ListField,
    RecordField,
    class_decorator,
)
from .circle import sigma_alpha_witnesses
from .exceptions import ConsistencyError, DomainError
from .netgen import digit_set
from .structure import Angle, DigitSet, SUnitParams
from .validate import validate_min_int_arg, validate_open_interval_arg

logger = logging.getLogger(__name__)


def ta_shift(x: int, a: int, k: int = 1) -> int:
    """The a-ary shift applied k times: floor(x / a^k)"""
    return x // a**k


def project(ds: DigitSet, s: int) -> DigitSet:
    """Residues mod a^s; the Σ-budget grows to M1 * a^(n-s)"""
    if not 0 <= s <= ds.n:
        raise DomainError(f"Projection length s={s} must lie in [0, {ds.n}]")
    modulus = ds.a**s
    bound = None
    if ds.source_bound is not None:
        bound = ds.source_bound * ds.a ** (ds.n - s)
    return DigitSet(ds.a, s, tuple(r % modulus for r in ds.residues), bound)


@class_decorator
class Stratum(BaseObject):
    """Members of the s-digit projection sharing the low digits λ mod a^(s-l)"""

    a = IntegerField()
    n = IntegerField()
    s = IntegerField()
    l = IntegerField()  # noqa: E741
    lam = IntegerField()
    members = ListField(IntegerField())
    source_bound = IntegerField()

    _string_format = "s={s} l={l} λ={lam}"

    @property
    def X(self) -> int:
        return len(self.members)


def _check_shape(ds: DigitSet, s: int, l: int) -> None:  # noqa: E741
    if not 0 <= l <= s <= ds.n:
        raise DomainError(f"Need 0 <= l <= s <= n, got l={l}, s={s}, n={ds.n}")


def stratify(ds: DigitSet, s: int, l: int) -> Dict[int, Stratum]:  # noqa: E741
    _check_shape(ds, s, l)
    projected = project(ds, s)
    low = ds.a ** (s - l)
    buckets: Dict[int, List[int]] = {}
    for x in projected.residues:
        buckets.setdefault(x % low, []).append(x)
    return {
        lam: Stratum.build(
            a=ds.a,
            n=ds.n,
            s=s,
            l=l,
            lam=lam,
            members=members,
            source_bound=projected.source_bound,
        )
        for lam, members in sorted(buckets.items())
    }


@class_decorator
class SearchResult(BaseObject):
    """Best stratum over the grid s = n - j*l"""

    stratum = RecordField(Stratum)
    eps = FloatField()
    threshold = FloatField()
    passed = BooleanField()
    grid = ListField(IntegerField())

    _string_format = "{stratum} threshold={threshold} pass={passed}"

    @property
    def X(self) -> int:
        return self.stratum.X


def search_grid(n: int, l: int, eps: float) -> List[int]:  # noqa: E741
    J = ceil((1 - eps) * n / l)
    grid = []
    for j in range(J + 1):
        s = n - j * l
        if s >= eps * n and s >= l:
            grid.append(s)
    return grid


def lemma4_threshold(a: int, l: int, eps: float) -> float:  # noqa: E741
    return a ** ((0.5 - 2 * eps) * l)


def _passes(X: int, a: int, l: int, eps: float) -> bool:  # noqa: E741
    return log(X) >= (0.5 - 2 * eps) * l * log(a) if X else False


def combinatorial_search(
    ds: DigitSet,
    l: int,  # noqa: E741
    eps: Optional[float] = None,
    s_values: Optional[List[int]] = None,
) -> SearchResult:
    if eps is None:
        eps = config.main_config.getfloat("digits", "eps")
    eps = validate_open_interval_arg("eps", eps, 0, 0.25)
    l = validate_min_int_arg("l", l, 1)  # noqa: E741
    if l > ds.n:
        raise DomainError(f"l={l} exceeds the digit length n={ds.n}")
    if not len(ds):
        raise DomainError("Cannot search an empty digit set")

    grid = s_values if s_values is not None else search_grid(ds.n, l, eps)
    best = None
    for s in grid:
        for stratum in stratify(ds, s, l).values():
            if best is None or stratum.X > best.X:
                best = stratum
    if best is None:
        raise DomainError(f"Empty search grid for n={ds.n}, l={l}, eps={eps}")

    passed = _passes(best.X, ds.a, l, eps)
    logger.debug("Search over %s picked %s with X=%d", grid, best, best.X)
    return SearchResult.build(
        stratum=best,
        eps=eps,
        threshold=lemma4_threshold(ds.a, l, eps),
        passed=passed,
        grid=grid,
    )


@class_decorator
class Lemma4Check(BaseObject):
    """Strong form: a dense enough digit set must pass the search"""

    size = IntegerField()
    required_size = FloatField()
    hypothesis = BooleanField()
    passed = BooleanField()
    holds = BooleanField()

    _string_format = "hypothesis={hypothesis} passed={passed} holds={holds}"


def lemma4_holds(
    ds: DigitSet,
    l: int,  # noqa: E741
    eps: Optional[float] = None,
    c: Optional[float] = None,
) -> Lemma4Check:
    if c is None:
        c = config.main_config.getfloat("digits", "lemma4_c")
    required = c * ds.a ** (ds.n / 2)
    hypothesis = len(ds) >= required
    result = combinatorial_search(ds, l, eps)
    return Lemma4Check.build(
        size=len(ds),
        required_size=required,
        hypothesis=hypothesis,
        passed=result.passed,
        holds=result.passed or not hypothesis,
    )


@class_decorator
class YSet(BaseObject):
    """Top-l-digit image of a stratum, shifted by γ = λ / a^s"""

    a = IntegerField()
    l = IntegerField()  # noqa: E741
    s = IntegerField()
    lam = IntegerField()
    gamma = AngleField()
    members = ListField(IntegerField())
    source_M2 = IntegerField()

    _string_format = "Y={Y} l={l} γ={gamma}"

    @property
    def Y(self) -> int:
        return len(self.members)

    @property
    def modulus(self) -> int:
        return self.a**self.l

    def lift(self, y: int) -> int:
        """x = λ + y * a^(s-l)"""
        return self.lam + y * self.a ** (self.s - self.l)

    @classmethod
    def synthetic(
        cls,
        a: int,
        l: int,  # noqa: E741
        members,
        gamma: Angle,
        s: Optional[int] = None,
    ):
        """A free-standing set with arbitrary γ, for moment checks"""
        return cls.build(
            a=a,
            l=l,
            s=l if s is None else s,
            lam=0,
            gamma=gamma,
            members=sorted(set(members)),
        )


def extract_y(st: Stratum, m2: Optional[int] = None) -> YSet:
    low = st.a ** (st.s - st.l)
    members = []
    for x in st.members:
        if x % low != st.lam:
            raise ConsistencyError(f"Member {x} is not ≡ {st.lam} mod {low}")
        members.append((x - st.lam) // low)
    return YSet.build(
        a=st.a,
        l=st.l,
        s=st.s,
        lam=st.lam,
        gamma=Angle(st.lam, st.a**st.s),
        members=sorted(members),
        source_M2=st.source_bound if m2 is None else m2,
    )


@class_decorator
class WitnessCheck(BaseObject):
    """Exhaustive witness search over Σ(bound)"""

    bound = IntegerField()
    checked = IntegerField()
    missing = ListField(IntegerField())
    holds = BooleanField()

    _string_format = "checked {checked} within Σ({bound}), holds={holds}"


def top_digit_witnesses(
    params: SUnitParams, alpha: Angle, bound: int, s: int
) -> Dict[int, int]:
    """floor(a^s {qα}) -> smallest q in Σ(bound) producing it"""
    modulus = params.a**s
    found: Dict[int, int] = {}
    for point, q in sigma_alpha_witnesses(params, bound, alpha).items():
        x = point.num * modulus // point.den
        if x not in found or q < found[x]:
            found[x] = q
    return found


def verify_lemma3(
    params: SUnitParams, alpha: Angle, M1: int, n: int, s: int
) -> WitnessCheck:
    if not 0 <= s <= n:
        raise DomainError(f"Need 0 <= s <= n, got s={s}, n={n}")
    projected = project(digit_set(params, alpha, M1, n), s)
    bound = M1 * params.a ** (n - s)
    witnesses = top_digit_witnesses(params, alpha, bound, s)
    missing = [x for x in projected.residues if x not in witnesses]
    return WitnessCheck.build(
        bound=bound, checked=len(projected), missing=missing, holds=not missing
    )


def verify_defo(y: YSet, params: SUnitParams, alpha: Angle) -> WitnessCheck:
    """Every y has q in Σ(M2) with |y/a^l + γ - {qα}| <= a^-s"""
    if y.source_M2 is None:
        raise ConsistencyError("The set carries no Σ-budget to search")
    witnesses = top_digit_witnesses(params, alpha, y.source_M2, y.s)
    tolerance = Fraction(1, params.a**y.s)
    missing = []
    for member in y.members:
        q = witnesses.get(y.lift(member))
        target = Fraction(member, y.modulus) + y.gamma.value
        if q is None or abs(target - alpha.scale(q).value) > tolerance:
            missing.append(member)
    return WitnessCheck.build(
        bound=y.source_M2, checked=y.Y, missing=missing, holds=not missing
    )
