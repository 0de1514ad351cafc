"""Real numbers as rationals, continued fractions, decimals and log ratios

Partial quotients of a non-rational input are only emitted once the
enclosure decides them, and every convergent is re-checked against its
defining inequality before it is returned.

"""

import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from math import floor
from typing import Dict, Iterator, List, Optional, Tuple

from .base import (
    BaseObject,
    BooleanField,
    FloatField,
    FractionField,
    IntegerField,
    ListField,
    RecordField,
    class_decorator,
)
from .exceptions import ConsistencyError, DomainError, PrecisionError
from .interval import (
    Enclosure,
    certified_enclosure,
    fraction_to_iv,
    log_ratio,
    retry_precision,
)
from .structure import Convergent, PsiSpec, SUnitParams
from .validate import validate_min_int_arg

logger = logging.getLogger(__name__)

KINDS = ("rational", "cf", "decimal", "log_ratio")
MIN_DECIMAL_BITS = 64


def cf_expand(x: Fraction) -> List[int]:
    """Canonical finite continued fraction of a rational"""
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    quotients = []
    while den:
        q, r = divmod(num, den)
        quotients.append(q)
        num, den = den, r
    return quotients


@dataclass(frozen=True)
class RealSpec:
    """A real number given exactly, by continued fraction, decimal or log ratio"""

    kind: str
    rational: Optional[Fraction] = None
    quotients: Tuple[int, ...] = field(default_factory=tuple)
    period_from: Optional[int] = None
    decimal: Optional[str] = None
    bits: int = 0
    bases: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"Unknown real kind {self.kind}")
        if self.kind == "cf":
            if not self.quotients:
                raise DomainError("A continued fraction needs at least one quotient")
            if any(q < 1 for q in self.quotients[1:]):
                raise DomainError("Partial quotients after the first must be >= 1")
            if self.period_from is not None and not (
                1 <= self.period_from < len(self.quotients)
            ):
                raise DomainError(f"Invalid period start {self.period_from}")
        if self.kind == "decimal" and self.bits < MIN_DECIMAL_BITS:
            raise DomainError(
                f"Decimal precision must be at least {MIN_DECIMAL_BITS} bits"
            )

    @classmethod
    def from_rational(cls, value) -> "RealSpec":
        return cls("rational", rational=Fraction(value))

    @classmethod
    def from_cf(cls, quotients, period_from: Optional[int] = None) -> "RealSpec":
        return cls(
            "cf", quotients=tuple(int(q) for q in quotients), period_from=period_from
        )

    @classmethod
    def from_decimal(cls, text: str, bits: int = 256) -> "RealSpec":
        return cls("decimal", decimal=text.strip(), bits=int(bits))

    @classmethod
    def from_log_ratio(cls, a: int, b: int) -> "RealSpec":
        SUnitParams(a, b)
        return cls("log_ratio", bases=(a, b))

    @classmethod
    def from_json(cls, data: Dict) -> "RealSpec":
        try:
            if "rational" in data:
                return cls.from_rational(data["rational"])
            if "cf" in data:
                return cls.from_cf(data["cf"], data.get("period_from"))
            if "decimal" in data:
                return cls.from_decimal(data["decimal"], data.get("bits", 256))
            if "log_ratio" in data:
                a, b = data["log_ratio"]
                return cls.from_log_ratio(int(a), int(b))
        except (TypeError, ValueError, ZeroDivisionError) as error:
            raise DomainError(
                "Invalid real number specification", inner=error
            ) from error
        raise DomainError(f"Unknown real number specification {data}")

    @classmethod
    def from_string(cls, input_string: str) -> "RealSpec":
        text = input_string.strip()
        if text.startswith("{"):
            return cls.from_json(json.loads(text))
        return cls.from_json({"rational": text})

    def to_json(self) -> Dict:
        if self.kind == "rational":
            return {"rational": str(self.rational)}
        if self.kind == "cf":
            data = {"cf": list(self.quotients)}
            if self.period_from is not None:
                data["period_from"] = self.period_from
            return data
        if self.kind == "decimal":
            return {"decimal": self.decimal, "bits": self.bits}
        return {"log_ratio": list(self.bases)}

    def __str__(self):
        return json.dumps(self.to_json())

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational" or (
            self.kind == "cf" and self.period_from is None
        )

    @property
    def exact_value(self) -> Fraction:
        if self.kind == "rational":
            return self.rational
        if self.kind == "cf" and self.period_from is None:
            value = Fraction(self.quotients[-1])
            for q in reversed(self.quotients[:-1]):
                value = q + 1 / value
            return value
        raise DomainError("Only rational specifications have an exact value")

    def quotient(self, index: int) -> Optional[int]:
        if index < len(self.quotients):
            return self.quotients[index]
        if self.period_from is None:
            return None
        period = len(self.quotients) - self.period_from
        return self.quotients[self.period_from + (index - self.period_from) % period]

    def enclosure(self, bits: int) -> Enclosure:
        if self.is_rational:
            return Enclosure.point(self.exact_value)
        if self.kind == "decimal":
            try:
                exponent = Decimal(self.decimal).as_tuple().exponent
            except InvalidOperation as error:
                raise DomainError(f"Invalid decimal {self.decimal}") from error
            radius = Fraction(1, 2) * Fraction(10) ** exponent
            return Enclosure.around(Fraction(self.decimal), radius)
        if self.kind == "log_ratio":
            return log_ratio(self.bases[0], self.bases[1], bits)
        return self._cf_enclosure(bits)

    def _cf_enclosure(self, bits: int) -> Enclosure:
        target = Fraction(1, 2**bits)
        p2, p1, q2, q1 = 0, 1, 1, 0
        index = 0
        previous = None
        while True:
            a = self.quotient(index)
            p2, p1 = p1, a * p1 + p2
            q2, q1 = q1, a * q1 + q2
            current = Fraction(p1, q1)
            if previous is not None and Fraction(1, q1 * q2) < target:
                return Enclosure(min(previous, current), max(previous, current))
            previous = current
            index += 1

    def norm_enclosure(self, q: int, bits: int) -> Enclosure:
        """Enclosure of ||q x||"""
        return (self.enclosure(bits) * q).norm()

    def iter_quotients(self, bits: int) -> Iterator[int]:
        if self.is_rational:
            yield from cf_expand(self.exact_value)
            return
        if self.kind == "cf":
            index = 0
            while True:
                yield self.quotient(index)
                index += 1
        enclosure = self.enclosure(bits)
        lo, hi = enclosure.lo, enclosure.hi
        while True:
            a = floor(lo)
            if floor(hi) != a or lo == a:
                raise PrecisionError(
                    "Cannot decide the next partial quotient", 2 * bits
                )
            yield a
            lo, hi = 1 / (hi - a), 1 / (lo - a)


def iter_convergents(x: RealSpec, bits: int) -> Iterator[Convergent]:
    p2, p1, q2, q1 = 0, 1, 1, 0
    for index, a in enumerate(x.iter_quotients(bits)):
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        yield Convergent(p1, q1, index)


def _check_convergent(x: RealSpec, conv: Convergent, bits: int) -> None:
    error = abs(x.enclosure(bits) - conv.value)
    bound = Fraction(1, conv.q * conv.q)
    if error.certainly_lt(bound):
        return
    if error.lo >= bound:
        raise ConsistencyError(f"Convergent {conv} violates |x - p/q| < 1/q^2")
    required = max(2 * bits, 4 * conv.q.bit_length() + 64)
    raise PrecisionError(f"Cannot certify convergent {conv}", required)


def _convergents_at(x: RealSpec, q_limit: int, bits: int, with_next: bool):
    result = []
    following = None
    try:
        for conv in iter_convergents(x, bits):
            if conv.q > q_limit:
                following = conv
                break
            _check_convergent(x, conv, bits)
            result.append(conv)
    except PrecisionError as error:
        last_q = result[-1].q if result else 1
        raise PrecisionError(
            error.message, max(error.required_bits, 4 * last_q.bit_length() + 64)
        ) from error
    if with_next and following is None and not x.is_rational:
        raise PrecisionError("Cannot decide the convergent after the limit", 2 * bits)
    return result, following


def convergents(
    x: RealSpec, q_limit: int, bits: Optional[int] = None
) -> List[Convergent]:
    q_limit = validate_min_int_arg("q_limit", q_limit, 1)
    result, _ = retry_precision(lambda b: _convergents_at(x, q_limit, b, False), bits)
    return result


def dirichlet_approx(
    x: RealSpec, N: int, bits: Optional[int] = None
) -> Tuple[int, int]:
    """(A, Q) with 1 <= Q <= N and |x - A/Q| <= 1/(QN)"""
    N = validate_min_int_arg("N", N, 1)

    def attempt(current_bits: int) -> Tuple[int, int]:
        found, _ = _convergents_at(x, N, current_bits, False)
        best = found[-1]
        error = abs(x.enclosure(current_bits) - best.value)
        bound = Fraction(1, best.q * N)
        if not error.certainly_le(bound):
            if error.lo > bound:
                raise ConsistencyError(f"Dirichlet bound fails for {best}")
            raise PrecisionError(
                f"Cannot certify Dirichlet bound for {best}", 2 * current_bits
            )
        return best.p, best.q

    return retry_precision(attempt, bits)


@class_decorator
class PsiWitness(BaseObject):
    """Outcome of the psi-badness check up to N"""

    N = IntegerField()
    ok = BooleanField()
    A = IntegerField()
    Q = IntegerField()
    violation_q = IntegerField()
    psi_inverse = FloatField()
    in_window = BooleanField()

    _string_format = "ok={ok} A={A} Q={Q} violation={violation_q}"


def _psi_enclosure(psi: PsiSpec, q: int, bits: int) -> Enclosure:
    if psi.exact:
        return Enclosure.point(psi.k1 / Fraction(q) ** int(psi.k2))

    def compute(ctx):
        k1 = fraction_to_iv(ctx, psi.k1)
        k2 = fraction_to_iv(ctx, psi.k2)
        return k1 * ctx.exp(-k2 * ctx.log(q))

    return certified_enclosure(compute, bits)


def psi_bad_witness(
    x: RealSpec, psi: PsiSpec, N: int, bits: Optional[int] = None
) -> PsiWitness:
    N = validate_min_int_arg("N", N, 2)

    def attempt(current_bits: int) -> PsiWitness:
        found, _ = _convergents_at(x, N, current_bits, False)
        for conv in found:
            distance = x.norm_enclosure(conv.q, current_bits)
            bound = _psi_enclosure(psi, conv.q, current_bits)
            if distance.certainly_lt(bound):
                logger.info("psi-badness fails at q=%d", conv.q)
                return PsiWitness.build(
                    N=N, ok=False, violation_q=conv.q, psi_inverse=psi.inverse(N)
                )
            if not distance.lo >= bound.hi:
                raise PrecisionError(
                    f"Cannot compare ||{conv.q}x|| with psi", 2 * current_bits
                )
        A, Q = dirichlet_approx(x, N, current_bits)
        lower = psi.inverse(N)
        return PsiWitness.build(
            N=N, ok=True, A=A, Q=Q, psi_inverse=lower, in_window=lower <= Q <= N
        )

    return retry_precision(attempt, bits)


@class_decorator
class BakerRow(BaseObject):
    p = IntegerField()
    q = IntegerField()
    next_q = IntegerField()
    error_lo = FractionField()
    scaled = FloatField()
    scaled_lo = FloatField()

    _string_format = "{p}/{q}: {scaled}"


@class_decorator
class BakerProbe(BaseObject):
    """q^beta |log a / log b - p/q| over convergents"""

    a = IntegerField()
    b = IntegerField()
    beta = FloatField()
    q_limit = IntegerField()
    bits = IntegerField()
    rows = ListField(RecordField(BakerRow))
    c0 = FloatField()
    c0_certified_positive = BooleanField()
    argmin_q = IntegerField()

    _string_format = "c0={c0} at q={argmin_q} over {q_limit}"


def baker_probe(
    params: SUnitParams, beta: float, q_limit: int, bits: Optional[int] = None
) -> BakerProbe:
    q_limit = validate_min_int_arg("q_limit", q_limit, 1)
    x = RealSpec.from_log_ratio(params.a, params.b)
    required = 4 * q_limit.bit_length() + 64

    def attempt(current_bits: int) -> BakerProbe:
        if current_bits < required:
            raise PrecisionError(f"Probing up to q={q_limit}", required)
        found, following = _convergents_at(x, q_limit, current_bits, True)
        enclosure = x.enclosure(current_bits)
        chain = found + [following]
        rows = []
        for conv, after in zip(chain, chain[1:]):
            error = abs(enclosure - conv.value)
            lower = Fraction(1, conv.q * (after.q + conv.q))
            upper = Fraction(1, conv.q * after.q)
            if not (error.certainly_gt(lower) and error.certainly_lt(upper)):
                if error.hi <= lower or error.lo >= upper:
                    raise ConsistencyError(
                        f"Continued fraction inequality fails at {conv}"
                    )
                raise PrecisionError(f"Cannot certify row {conv}", 2 * current_bits)

            def compute(ctx, q=conv.q, error=error):
                return ctx.exp(ctx.log(q) * ctx.mpf(beta)) * error.to_iv(ctx)

            scaled = certified_enclosure(compute, current_bits)
            rows.append(
                BakerRow.build(
                    p=conv.p,
                    q=conv.q,
                    next_q=after.q,
                    error_lo=error.lo,
                    scaled=float(scaled.midpoint),
                    scaled_lo=float(scaled.lo),
                )
            )

        best = min(rows, key=lambda row: (row.scaled, row.q))
        return BakerProbe.build(
            a=params.a,
            b=params.b,
            beta=beta,
            q_limit=q_limit,
            bits=current_bits,
            rows=rows,
            c0=best.scaled,
            c0_certified_positive=all(row.error_lo > 0 for row in rows),
            argmin_q=best.q,
        )

    return retry_precision(attempt, bits)
