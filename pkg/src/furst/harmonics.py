"""Subgroups of (Z/a^l)^*, exponential sums and the moment checks over them"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

import numpy as np
from sympy import factorint, reduced_totient, totient

from . import config
from .base import (
    BaseObject,
    BooleanField,
    FloatField,
    FractionField,
    IntegerField,
    ListField,
    class_decorator,
)
from .digits import YSet
from .exceptions import ConsistencyError, DomainError
from .interval import distance_to_integer
from .structure import Angle, BumpSpec, SUnitParams
from .util import make_rng
from .validate import validate_min_int_arg

logger = logging.getLogger(__name__)

# int64 products of two residues stay exact below this modulus
MAX_NUMERIC_MODULUS = 2**31
BLOCK_SIZE = 256

TermTransform = Callable[[np.ndarray], np.ndarray]


def mult_order(b: int, a: int, l: int) -> int:  # noqa: E741
    """Order of b mod a^l from the Carmichael function"""
    l = validate_min_int_arg("l", l, 1)  # noqa: E741
    modulus = a**l
    if gcd(a, b) != 1:
        raise DomainError(f"b={b} is not a unit modulo {a}^{l}")
    order = int(reduced_totient(modulus))
    for prime in factorint(order):
        while order % prime == 0 and pow(b, order // prime, modulus) == 1:
            order //= prime
    return order


def kappa(a: int, b: int) -> int:
    """ceil(a^3 log_a b), the least k with a^k >= b^(a^3)"""
    target = b ** (a**3)
    k, power = 0, 1
    while power < target:
        power *= a
        k += 1
    return k


@class_decorator
class SubgroupDescriptor(BaseObject):
    """The cyclic subgroup generated by b modulo a^l"""

    a = IntegerField()
    b = IntegerField()
    l = IntegerField()  # noqa: E741
    S = IntegerField()
    kappa = IntegerField()
    l1 = IntegerField()

    _string_format = "<{b}> mod {a}^{l}: S={S} ϰ={kappa} l1={l1}"

    @property
    def modulus(self) -> int:
        return self.a**self.l

    @property
    def kappa1(self) -> float:
        return self.S / self.modulus

    def iter_elements(self) -> Iterator[int]:
        value = 1
        for _ in range(self.S):
            yield value
            value = value * self.b % self.modulus

    def elements(self) -> np.ndarray:
        if self.modulus > MAX_NUMERIC_MODULUS:
            raise DomainError(f"Modulus {self.modulus} is too large for numeric sums")
        return np.fromiter(self.iter_elements(), dtype=np.int64, count=self.S)


def subgroup(params: SUnitParams, l: int) -> SubgroupDescriptor:  # noqa: E741
    l = validate_min_int_arg("l", l, 1)  # noqa: E741
    S = mult_order(params.b, params.a, l)
    modulus = params.a**l
    if pow(params.b, S, modulus) != 1 or int(totient(modulus)) % S:
        raise ConsistencyError(f"Order {S} of {params.b} mod {modulus} is inconsistent")
    k = kappa(params.a, params.b)
    return SubgroupDescriptor.build(
        a=params.a, b=params.b, l=l, S=S, kappa=k, l1=max(l - k, 0)
    )


@class_decorator
class KappaRow(BaseObject):
    l = IntegerField()  # noqa: E741
    S = IntegerField()
    ratio = FloatField()

    _string_format = "l={l} S={S} S/a^l={ratio}"


def kappa1_profile(params: SUnitParams, ls: Iterable[int]) -> List[KappaRow]:
    rows = []
    for l in ls:  # noqa: E741
        desc = subgroup(params, l)
        rows.append(KappaRow.build(l=l, S=desc.S, ratio=desc.kappa1))
    return rows


@dataclass(frozen=True)
class ExpSumValue:
    real: float
    imag: float
    term_count: int

    @property
    def abs(self) -> float:
        return float(np.hypot(self.real, self.imag))

    @classmethod
    def from_complex(cls, value: complex, term_count: int) -> "ExpSumValue":
        return cls(float(value.real), float(value.imag), term_count)

    def __str__(self):
        return f"{self.real!r}{self.imag:+}i"


def _term_block(phases: np.ndarray) -> np.ndarray:
    """e(phase) for phases given as fractions of a turn"""
    return np.exp(2j * np.pi * phases)


def _sums_for(
    ms: np.ndarray,
    elements: np.ndarray,
    modulus: int,
    term_transform: Optional[TermTransform] = None,
) -> np.ndarray:
    residues = np.outer(ms % modulus, elements) % modulus
    terms = _term_block(residues / modulus)
    if term_transform is not None:
        terms = term_transform(terms)
    # numpy reduces float arrays pairwise
    return terms.real.sum(axis=1) + 1j * terms.imag.sum(axis=1)


def exp_sum(desc: SubgroupDescriptor, m: int) -> ExpSumValue:
    ms = np.array([m % desc.modulus], dtype=np.int64)
    total = _sums_for(ms, desc.elements(), desc.modulus)
    return ExpSumValue.from_complex(complex(total[0]), desc.S)


def iter_exp_sums(
    desc: SubgroupDescriptor,
    ms: Iterable[int],
    term_transform: Optional[TermTransform] = None,
) -> Iterator[Tuple[int, ExpSumValue]]:
    elements = desc.elements()
    block: List[int] = []
    for m in ms:
        block.append(m)
        if len(block) == BLOCK_SIZE:
            yield from _emit(desc, block, elements, term_transform)
            block = []
    if block:
        yield from _emit(desc, block, elements, term_transform)


def _emit(desc, block, elements, term_transform):
    ms = np.array(block, dtype=np.int64)
    sums = _sums_for(ms, elements, desc.modulus, term_transform)
    for m, value in zip(block, sums):
        yield m, ExpSumValue.from_complex(complex(value), desc.S)


def adic_level(m: int, a: int, cap: int) -> int:
    """Largest k <= cap with a^k | m"""
    k = 0
    while k < cap and m % a ** (k + 1) == 0:
        k += 1
    return k


@class_decorator
class Lemma5Report(BaseObject):
    """Vanishing of subgroup sums for m not divisible by a^l1"""

    a = IntegerField()
    b = IntegerField()
    l = IntegerField()  # noqa: E741
    l1 = IntegerField()
    S = IntegerField()
    tolerance = FloatField()
    vacuous = BooleanField()
    scanned = IntegerField()
    violations = ListField(IntegerField())
    max_abs = FloatField()
    observed_threshold = IntegerField()

    _string_format = (
        "l={l} l1={l1} violations={violations} observed={observed_threshold}"
    )

    @property
    def passed(self) -> bool:
        return not self.violations


def lemma5_scan(
    desc: SubgroupDescriptor,
    tolerance: Optional[float] = None,
    threads: Optional[int] = None,
    term_transform: Optional[TermTransform] = None,
) -> Lemma5Report:
    if tolerance is None:
        tolerance = config.main_config.getfloat("harmonics", "tolerance")
    common = dict(
        a=desc.a, b=desc.b, l=desc.l, l1=desc.l1, S=desc.S, tolerance=tolerance
    )
    if desc.l1 == 0:
        logger.info("Lemma 5 scan is vacuous for l=%d (l1=0)", desc.l)
        return Lemma5Report.build(vacuous=True, scanned=0, violations=[], **common)

    modulus = desc.modulus
    elements = desc.elements()
    limit = tolerance * desc.S
    blocks = [
        np.arange(start, min(start + BLOCK_SIZE, modulus), dtype=np.int64)
        for start in range(1, modulus, BLOCK_SIZE)
    ]

    def scan(ms: np.ndarray) -> np.ndarray:
        return np.abs(_sums_for(ms, elements, modulus, term_transform))

    threads = threads or config.thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            magnitudes = list(executor.map(scan, blocks))
    else:
        magnitudes = [scan(ms) for ms in blocks]

    violations = []
    max_abs = 0.0
    observed = desc.l
    claimed_unit = desc.a**desc.l1
    for ms, values in zip(blocks, magnitudes):
        for m, value in zip(ms.tolist(), values.tolist()):
            if value > limit:
                observed = min(observed, adic_level(m, desc.a, desc.l))
                if m % claimed_unit:
                    violations.append(m)
            if m % claimed_unit:
                max_abs = max(max_abs, value)

    logger.info(
        "Lemma 5 scan l=%d: %d violations, vanishing observed below level %d",
        desc.l,
        len(violations),
        observed,
    )
    return Lemma5Report.build(
        vacuous=False,
        scanned=modulus - 1,
        violations=violations,
        max_abs=max_abs,
        observed_threshold=observed,
        **common,
    )


def sigma_sum(y: YSet, m: int) -> ExpSumValue:
    """Σ_y e(m (y/a^l + γ)), the γ part applied as one exact phase"""
    modulus = y.modulus
    members = np.array(y.members, dtype=np.int64)
    terms = _term_block((m % modulus) * members % modulus / modulus)
    shift = Angle.from_fraction(m * y.gamma.value)
    rotation = np.exp(2j * np.pi * float(shift))
    total = complex(terms.real.sum(), terms.imag.sum()) * rotation
    return ExpSumValue.from_complex(total, y.Y)


def power_spectrum(y: YSet) -> np.ndarray:
    """|σ(m)|^2 for every m mod a^l; γ only rotates the sum"""
    indicator = np.zeros(y.modulus)
    indicator[np.array(y.members, dtype=np.int64)] = 1.0
    return np.abs(np.fft.fft(indicator)) ** 2


@class_decorator
class Lemma6Check(BaseObject):
    m = IntegerField()
    lhs = FloatField()
    rhs = IntegerField()
    weight = IntegerField()
    ratio = FloatField()
    holds = BooleanField()

    _string_format = "m={m} ratio={ratio} holds={holds}"


def _require_matching(y: YSet, desc: SubgroupDescriptor) -> None:
    if y.a != desc.a or y.l != desc.l:
        raise ConsistencyError(
            f"Set lives mod {y.a}^{y.l}, subgroup mod {desc.a}^{desc.l}"
        )


def lemma6_check(
    y: YSet,
    desc: SubgroupDescriptor,
    m: int,
    spectrum: Optional[np.ndarray] = None,
    relative_tolerance: Optional[float] = None,
) -> Lemma6Check:
    _require_matching(y, desc)
    if relative_tolerance is None:
        relative_tolerance = config.main_config.getfloat(
            "harmonics", "relative_tolerance"
        )
    if spectrum is None:
        spectrum = power_spectrum(y)
    indices = (m % desc.modulus) * desc.elements() % desc.modulus
    lhs = float(spectrum[indices].sum())
    weight = desc.a**desc.kappa * gcd(desc.a**desc.l1, m)
    rhs = weight * desc.S * y.Y
    exact_lhs = Fraction(lhs)
    holds = exact_lhs <= rhs * (1 + Fraction(relative_tolerance))
    return Lemma6Check.build(
        m=m,
        lhs=lhs,
        rhs=rhs,
        weight=weight,
        ratio=float(exact_lhs / rhs),
        holds=holds,
    )


def bump_eval(spec: BumpSpec, t) -> float:
    """Fejér triangle max(0, 1 - H ||t||)"""
    distance = distance_to_integer(t if isinstance(t, Fraction) else Fraction(t))
    return max(0.0, 1.0 - float(spec.H) * float(distance))


def bump_fourier(spec: BumpSpec, m: int) -> float:
    H = float(spec.H)
    if m == 0:
        return 1 / H
    return H * (np.sin(np.pi * m / H) / (np.pi * m)) ** 2


def bump_derivative_norm(spec: BumpSpec) -> float:
    """||f'||_2^2 of the triangle"""
    return 2 * float(spec.H)


@class_decorator
class ParsevalCheck(BaseObject):
    H = FloatField()
    m_max = IntegerField()
    partial = FloatField()
    total = FloatField()
    upper_ok = BooleanField()
    lower_ok = BooleanField()

    _string_format = "H={H} partial={partial} of {total}"


def bump_parseval(spec: BumpSpec, m_max: int = 10_000) -> ParsevalCheck:
    """Σ_{0<|m|<=m_max} (2π m f_m)^2 against ||f'||^2 = 2H"""
    H = float(spec.H)
    ms = np.arange(1, m_max + 1, dtype=float)
    coefficients = H * (np.sin(np.pi * ms / H) / (np.pi * ms)) ** 2
    partial = 2 * float(np.sum((2 * np.pi * ms * coefficients) ** 2))
    total = bump_derivative_norm(spec)
    return ParsevalCheck.build(
        H=H,
        m_max=m_max,
        partial=partial,
        total=total,
        upper_ok=partial <= total * (1 + 1e-12),
        lower_ok=H > 64 or partial >= 0.99 * total,
    )


def _require_members(y: YSet) -> None:
    if not y.members:
        raise DomainError("The set is empty")


def remainder(y: YSet, desc: SubgroupDescriptor, w: int, spec: BumpSpec, z) -> float:
    """(1/Y) Σ_y f(b^w (y/a^l + γ) - z) - 1/H, arguments reduced exactly"""
    _require_members(y)
    if not 0 <= w < desc.S:
        raise DomainError(f"w={w} must lie in [0, {desc.S})")
    z = Fraction(z)
    gamma = y.gamma
    denominator = y.modulus * gamma.den
    factor = pow(desc.b, w, denominator)
    total = 0.0
    for member in y.members:
        numerator = member * gamma.den + gamma.num * y.modulus
        point = Fraction(factor * numerator % denominator, denominator)
        total += bump_eval(spec, point - z)
    return total / y.Y - 1 / float(spec.H)


def remainder_profile(
    y: YSet, desc: SubgroupDescriptor, spec: BumpSpec, z
) -> np.ndarray:
    """R for every w < S; residues exact, the kernel in floating point"""
    _require_matching(y, desc)
    _require_members(y)
    z = Fraction(z)
    H = float(spec.H)
    modulus = y.modulus
    members = np.array(y.members, dtype=np.int64)
    elements = desc.elements()
    gamma = y.gamma
    profile = np.empty(desc.S)
    for start in range(0, desc.S, BLOCK_SIZE):
        ws = range(start, min(start + BLOCK_SIZE, desc.S))
        shifts = np.array(
            [
                float(Angle(pow(desc.b, w, gamma.den) * gamma.num, gamma.den).value - z)
                for w in ws
            ]
        )
        residues = np.outer(elements[start : start + len(ws)], members) % modulus
        points = residues / modulus + shifts[:, None]
        points -= np.floor(points)
        distance = np.minimum(points, 1 - points)
        kernel = np.maximum(0.0, 1.0 - H * distance)
        profile[start : start + len(ws)] = kernel.mean(axis=1) - 1 / H
    return profile


@class_decorator
class Lemma7Check(BaseObject):
    """Mean square of the remainder over the subgroup"""

    H = FloatField()
    z = FractionField()
    Y = IntegerField()
    mean_square = FloatField()
    bound_scale = FloatField()
    ratio = FloatField()
    best_w = IntegerField()
    best_r = FloatField()
    holds = BooleanField()

    _string_format = "mean square {mean_square} ratio {ratio} best w={best_w}"


def lemma7_check(y: YSet, desc: SubgroupDescriptor, spec: BumpSpec, z) -> Lemma7Check:
    profile = remainder_profile(y, desc, spec, z)
    mean_square = float(np.mean(profile**2))
    best_w = int(np.argmin(np.abs(profile)))
    best_r = float(profile[best_w])
    holds = bool(abs(best_r) <= np.sqrt(mean_square) * (1 + 1e-12) + 1e-15)
    if not holds:
        raise ConsistencyError(f"min |R| = {abs(best_r)} exceeds the root mean square")
    bound_scale = bump_derivative_norm(spec) / y.Y
    return Lemma7Check.build(
        H=float(spec.H),
        z=Fraction(z),
        Y=y.Y,
        mean_square=mean_square,
        bound_scale=bound_scale,
        ratio=mean_square / bound_scale,
        best_w=best_w,
        best_r=best_r,
        holds=holds,
    )


@class_decorator
class Lemma8Result(BaseObject):
    """Global minimiser of ||b^w x / a^s - z||"""

    w = IntegerField()
    x = IntegerField()
    y = IntegerField()
    err = FractionField()
    H = FractionField()
    z = FractionField()
    s = IntegerField()
    scanned = IntegerField()
    success = BooleanField()

    _string_format = "w={w} x={x} err={err} success={success}"


def _target(z) -> Tuple[int, int]:
    z = Fraction(z)
    return z.numerator, z.denominator


def _lemma8_distance(x: int, bw: int, modulus: int, z_num: int, z_den: int) -> int:
    """Numerator of ||bw x / modulus - z|| over modulus * z_den"""
    big = modulus * z_den
    t = (bw * x % modulus * z_den - z_num * modulus) % big
    return min(t, big - t)


def _lemma8_result(y, s, best, z, H, scanned) -> Lemma8Result:
    distance, w, x, member = best
    z_num, z_den = _target(z)
    err = Fraction(distance, y.a**s * z_den)
    H = Fraction(H)
    return Lemma8Result.build(
        w=w,
        x=x,
        y=member,
        err=err,
        H=H,
        z=Fraction(z),
        s=s,
        scanned=scanned,
        success=err <= 1 / H,
    )


def _lemma8_shape(y: YSet, s_digits: Optional[int]) -> int:
    _require_members(y)
    if s_digits is not None and s_digits != y.s:
        raise ConsistencyError(f"The set was cut at s={y.s}, not {s_digits}")
    return y.s


def lemma8_search(
    y: YSet, desc: SubgroupDescriptor, z, H, s_digits: Optional[int] = None
) -> Lemma8Result:
    H = BumpSpec(H).H
    s = _lemma8_shape(y, s_digits)
    _require_matching(y, desc)
    modulus = y.a**s
    z_num, z_den = _target(z)
    lifted = [(member, y.lift(member)) for member in y.members]
    best = None
    bw = 1
    for w in range(desc.S):
        for member, x in lifted:
            distance = _lemma8_distance(x, bw, modulus, z_num, z_den)
            if best is None or distance < best[0]:
                best = (distance, w, x, member)
        bw = bw * desc.b % modulus
    return _lemma8_result(y, s, best, z, H, desc.S * y.Y)


def lemma8_oracle(
    y: YSet, desc: SubgroupDescriptor, z, H, seed: int = 0
) -> Lemma8Result:
    """Independent rescan in shuffled order with rational distances"""
    H = BumpSpec(H).H
    s = _lemma8_shape(y, None)
    z = Fraction(z)
    modulus = y.a**s
    pairs = [(w, member) for w in range(desc.S) for member in y.members]
    order = make_rng(seed).permutation(len(pairs))
    best = None
    for index in order.tolist():
        w, member = pairs[index]
        x = y.lift(member)
        point = Fraction(pow(desc.b, w, modulus) * x % modulus, modulus)
        distance = distance_to_integer(point - z)
        key = (distance, w, x)
        if best is None or key < best[0]:
            best = (key, member)
    (distance, w, x), member = best
    numerator = distance * modulus * z.denominator
    return _lemma8_result(y, s, (int(numerator), w, x, member), z, H, len(pairs))
