"""Assembly of the small-fractional-parts construction and the solvers built on it

`run_theorem1` chains the stages net -> digit set -> stratum -> subgroup
search for a rational target α = A/Q. The asymptotic inequalities are
only reported as flags, the exact structural facts (budget, witnesses,
achieved error) are asserted.

"""

import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd, log
from typing import Dict, List, Optional, Sequence, Tuple

from . import config
from .alpha import PsiWitness, RealSpec, dirichlet_approx, psi_bad_witness
from .base import (
    AngleField,
    BaseObject,
    BooleanField,
    FloatField,
    FractionField,
    IntegerField,
    ListField,
    RecordField,
    StringField,
    SUnitField,
    class_decorator,
)
from .circle import dispersion, sigma_alpha
from .digits import SearchResult, WitnessCheck, combinatorial_search, extract_y
from .digits import top_digit_witnesses, verify_defo, verify_lemma3
from .exceptions import (
    ConsistencyError,
    DegenerateInputError,
    DomainError,
    PrecisionError,
    PreconditionError,
)
from .harmonics import Lemma8Result, lemma8_search, subgroup
from .interval import (
    Enclosure,
    certified_floor_power,
    distance_to_integer,
    power_le,
    retry_precision,
)
from .netgen import Lemma2Check, NetReport, build_net, choose_n, digit_set
from .netgen import lemma2_record, verify_lemma2
from .structure import Angle, PsiSpec, SUnit, SUnitParams
from .sunits import enumerate_sigma
from .util import make_rng
from .validate import (
    validate_choice_arg,
    validate_fraction_arg,
    validate_min_int_arg,
    validate_open_interval_arg,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODES = ("brute", "pipeline")
UNIFORM_TARGETS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


@dataclass(frozen=True)
class PipelineConfig:
    """Inputs of one run; the optional M, n, s, l, H replace the derived values"""

    params: SUnitParams
    A: int
    Q: int
    delta: Fraction = Fraction(1)
    eps: float = 0.05
    targets: Tuple[Fraction, ...] = (Fraction(0),)
    M: Optional[int] = None
    n: Optional[int] = None
    s: Optional[int] = None
    l: Optional[int] = None  # noqa: E741
    H: Optional[int] = None
    seed: int = 0
    allow_collisions: bool = False

    def __post_init__(self):
        object.__setattr__(self, "delta", validate_fraction_arg("delta", self.delta))
        object.__setattr__(
            self,
            "targets",
            tuple(validate_fraction_arg("target", z) for z in self.targets),
        )
        if self.Q < 3:
            raise DomainError(f"Q must be at least 3, got {self.Q}")
        if gcd(self.A, self.Q) != 1:
            raise DomainError(f"A={self.A} and Q={self.Q} must be coprime")
        if self.delta <= 0:
            raise DomainError(f"delta must be positive, got {self.delta}")
        validate_open_interval_arg("eps", self.eps, 0, 0.125)
        if not self.targets:
            raise DomainError("At least one target is needed")
        for z in self.targets:
            if not 0 <= z <= 1:
                raise DomainError(f"Target {z} must lie in [0, 1]")

    @property
    def alpha(self) -> Angle:
        return Angle(self.A, self.Q)

    @classmethod
    def from_json(cls, data: Dict) -> "PipelineConfig":
        overrides = data.get("overrides") or {}
        default_delta = config.main_config.get("pipeline", "delta")
        return cls(
            params=SUnitParams(int(data["a"]), int(data["b"])),
            A=int(data["A"]),
            Q=int(data["Q"]),
            delta=Fraction(str(data.get("delta", default_delta))),
            eps=float(data.get("eps", config.main_config.getfloat("pipeline", "eps"))),
            targets=tuple(Fraction(str(z)) for z in data.get("targets", ["0"])),
            M=overrides.get("M"),
            n=overrides.get("n"),
            s=overrides.get("s"),
            l=overrides.get("l"),
            H=overrides.get("H"),
            seed=int(data.get("seed", config.main_config.getint("run", "seed"))),
            allow_collisions=bool(data.get("allow_collisions", False)),
        )

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as file:
            return cls.from_json(json.load(file))


@class_decorator
class TargetResult(BaseObject):
    """q* = b^w q for one target z, with its exact error"""

    z = FractionField()
    w = IntegerField()
    x = IntegerField()
    q = SUnitField()
    q_star = SUnitField()
    lemma8_err = FractionField()
    achieved = FractionField()
    hard_bound = FractionField()
    asymptotic_bound = FloatField()
    success = BooleanField()
    within_asymptotic_bound = BooleanField()
    within_budget = BooleanField()

    _string_format = "z={z}: q*={q_star} error={achieved}"


@class_decorator
class PipelineReport(BaseObject):
    schema = IntegerField()
    seed = IntegerField()
    a = IntegerField()
    b = IntegerField()
    A = IntegerField()
    Q = IntegerField()
    delta = FractionField()
    eps = FloatField()
    M = IntegerField()
    M1 = IntegerField()
    net = RecordField(NetReport)
    n = IntegerField()
    N = IntegerField()
    digit_count = IntegerField()
    lemma2 = RecordField(Lemma2Check)
    l = IntegerField()  # noqa: E741
    l_clamped = BooleanField()
    search = RecordField(SearchResult)
    s = IntegerField()
    lam = IntegerField()
    M2 = IntegerField()
    Y = IntegerField()
    gamma = AngleField()
    lemma3 = RecordField(WitnessCheck)
    defo = RecordField(WitnessCheck)
    H = IntegerField()
    S = IntegerField()
    kappa = IntegerField()
    l1 = IntegerField()
    budget_ok = BooleanField()
    half_digits_ok = BooleanField()
    eni_target = FloatField()
    results = ListField(RecordField(TargetResult))

    _string_format = "Q={Q} M={M} n={n} s={s} l={l} Y={Y} H={H} budget={budget_ok}"


def digit_window(params: SUnitParams, s: int) -> Tuple[int, bool]:
    """Largest l with b^(2 a^l) <= a^s, clamped to 1 (flagged)

    The pipeline calls this with s = n, the top of the search grid, before s
    is chosen. half_digits_ok records whether the inequality still holds for
    the s the search settles on.
    """
    top = params.a**s
    l = -1  # noqa: E741
    while params.b ** (2 * params.a ** (l + 1)) <= top:
        l += 1  # noqa: E741
    if l < 1:
        return 1, True
    return l, False


def eni_target(
    M: int, beta: Optional[float] = None, eps: Optional[float] = None
) -> Optional[float]:
    """C (log log M)^(1/(β-1) - ε), the digit count the asymptotics aim for"""
    beta = beta or config.main_config.getfloat("pipeline", "beta")
    eps = config.main_config.getfloat("pipeline", "eps") if eps is None else eps
    if M < 3 or log(log(M)) <= 0:
        return None
    constant = config.main_config.getfloat("pipeline", "eni_constant")
    return constant * log(log(M)) ** (1 / (beta - 1) - eps)


def as_sunit(params: SUnitParams, q: int) -> SUnit:
    u = v = 0
    rest = q
    while rest % params.a == 0:
        rest //= params.a
        u += 1
    while rest % params.b == 0:
        rest //= params.b
        v += 1
    if rest != 1:
        raise ConsistencyError(f"{q} is not of the form {params.a}^u {params.b}^v")
    return SUnit(u, v, q)


def _choose_digits(cfg: PipelineConfig, net: NetReport) -> int:
    natural = choose_n(min(net.delta, Fraction(1)), cfg.params.a)
    if cfg.n is None:
        return natural
    n = validate_min_int_arg("n", cfg.n, 1)
    if n > natural:
        raise PreconditionError(
            f"The net only resolves n <= {natural} digits, got n={n}"
        )
    return n


def _solve_target(
    cfg: PipelineConfig,
    lemma8,
    witnesses: Dict[int, int],
    s: int,
    H: int,
    budget_ok: bool,
    z: Fraction,
) -> TargetResult:
    params = cfg.params
    found: Lemma8Result = lemma8(z)
    q = witnesses.get(found.x)
    if q is None:
        raise ConsistencyError(f"No Σ witness for the digit block x={found.x}")
    unit = as_sunit(params, q)
    star = unit.times_b(params, found.w)
    achieved = distance_to_integer(Fraction(star.value * cfg.A, cfg.Q) - z)
    hard_bound = found.err + Fraction(params.b**found.w, params.a**s)
    if achieved > hard_bound:
        raise ConsistencyError(
            f"Error {achieved} of q*={star.value} exceeds {hard_bound}"
        )
    within_budget = power_le(star.value, cfg.Q, 1 + cfg.delta)
    if budget_ok and not within_budget:
        raise ConsistencyError(
            f"q*={star.value} exceeds Q^(1+δ) with the budget check passing"
        )
    asymptotic_bound = 1 / H + params.a ** (-s / 2)
    return TargetResult.build(
        z=z,
        w=found.w,
        x=found.x,
        q=unit,
        q_star=star,
        lemma8_err=found.err,
        achieved=achieved,
        hard_bound=hard_bound,
        asymptotic_bound=asymptotic_bound,
        success=found.success,
        within_asymptotic_bound=achieved <= asymptotic_bound,
        within_budget=within_budget,
    )


def run_theorem1(
    cfg: PipelineConfig, threads: Optional[int] = None, budget: Optional[int] = None
) -> PipelineReport:
    params, alpha = cfg.params, cfg.alpha
    M = cfg.M if cfg.M is not None else certified_floor_power(cfg.Q, cfg.delta / 2)
    M = validate_min_int_arg("M", M, 1)
    if M >= cfg.Q and not cfg.allow_collisions:
        raise PreconditionError(f"M={M} must stay below Q={cfg.Q}")

    net = build_net(params, alpha, M, cfg.allow_collisions, budget)
    n = _choose_digits(cfg, net)
    if n == 0:
        raise DegenerateInputError(f"Δ={net.delta} leaves no digits to work with")
    digits = digit_set(params, alpha, net.M1, n, budget)
    if cfg.n is None:
        lemma2 = verify_lemma2(net, digits)
    else:
        lemma2 = lemma2_record(len(digits), params.a, n)

    if cfg.l is None:
        # window taken at the top of the s grid
        l, clamped = digit_window(params, n)  # noqa: E741
        l = min(l, n)  # noqa: E741
    else:
        l, clamped = validate_min_int_arg("l", cfg.l, 1), False  # noqa: E741
    s_values = None
    if cfg.s is not None:
        if not l <= cfg.s <= n:
            raise PreconditionError(f"Need l <= s <= n, got l={l}, s={cfg.s}, n={n}")
        s_values = [cfg.s]
    search = combinatorial_search(digits, l, cfg.eps, s_values)
    stratum = search.stratum
    s = stratum.s
    M2 = net.M1 * params.a ** (n - s)
    y = extract_y(stratum, M2)
    defo = verify_defo(y, params, alpha)
    lemma3 = verify_lemma3(params, alpha, net.M1, n, s)

    H = cfg.H if cfg.H is not None else max(2, floor(y.Y ** (0.25 - cfg.eps)))
    H = validate_min_int_arg("H", H, 2)
    desc = subgroup(params, l)
    budget_ok = power_le(M2 * params.b ** (params.a**l), cfg.Q, 1 + cfg.delta)
    half_digits_ok = params.b ** (2 * params.a**l) <= params.a**s
    logger.info(
        "Stages for Q=%d: M=%d n=%d s=%d l=%d Y=%d H=%d S=%d budget=%s",
        cfg.Q, M, n, s, l, y.Y, H, desc.S, budget_ok,
    )

    witnesses = top_digit_witnesses(params, alpha, M2, s)

    def solve(z: Fraction) -> TargetResult:
        return _solve_target(
            cfg, lambda t: lemma8_search(y, desc, t, H), witnesses, s, H, budget_ok, z
        )

    threads = threads or config.thread_count()
    if threads > 1 and len(cfg.targets) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(solve, cfg.targets))
    else:
        results = [solve(z) for z in cfg.targets]

    return PipelineReport.build(
        schema=SCHEMA_VERSION,
        seed=cfg.seed,
        a=params.a,
        b=params.b,
        A=cfg.A,
        Q=cfg.Q,
        delta=cfg.delta,
        eps=cfg.eps,
        M=M,
        M1=net.M1,
        net=net,
        n=n,
        N=params.a**n,
        digit_count=len(digits),
        lemma2=lemma2,
        l=l,
        l_clamped=clamped,
        search=search,
        s=s,
        lam=stratum.lam,
        M2=M2,
        Y=y.Y,
        gamma=y.gamma,
        lemma3=lemma3,
        defo=defo,
        H=H,
        S=desc.S,
        kappa=desc.kappa,
        l1=desc.l1,
        budget_ok=budget_ok,
        half_digits_ok=half_digits_ok,
        eni_target=eni_target(M, eps=cfg.eps),
        results=results,
    )


@class_decorator
class SolveResult(BaseObject):
    """Best q found for ||q α - β||, error recomputed from scratch"""

    q = SUnitField()
    mode = StringField()
    N = IntegerField()
    error_lo = FractionField()
    error_hi = FractionField()
    exact = BooleanField()
    fallback = BooleanField()
    reason = StringField()
    bits = IntegerField()
    A = IntegerField()
    Q = IntegerField()
    z = FractionField()

    _string_format = "q={q} error in [{error_lo}, {error_hi}] mode={mode}"

    @property
    def error(self) -> Enclosure:
        return Enclosure(self.error_lo, self.error_hi)


def norm_error(
    alpha: RealSpec, beta: RealSpec, q: int, bits: Optional[int] = None
) -> Enclosure:
    """||q α - β|| as an exact point or a certified enclosure"""
    if alpha.is_rational and beta.is_rational:
        exact = q * alpha.exact_value - beta.exact_value
        return Enclosure.point(distance_to_integer(exact))
    bits = bits or config.default_bits()
    return (alpha.enclosure(bits) * q - beta.enclosure(bits)).norm()


def brute_force_best(
    params: SUnitParams,
    alpha: RealSpec,
    beta: RealSpec,
    N: int,
    bits: Optional[int] = None,
    budget: Optional[int] = None,
) -> SolveResult:
    N = validate_min_int_arg("N", N, 1)
    units = enumerate_sigma(params, N, budget)
    common = dict(mode="brute", N=N, fallback=False)

    if alpha.is_rational and beta.is_rational:
        best = None
        for unit in units:
            error = norm_error(alpha, beta, unit.value).lo
            if best is None or error < best[1]:
                best = (unit, error)
        unit, error = best
        return SolveResult.build(
            q=unit, error_lo=error, error_hi=error, exact=True, **common
        )

    def attempt(current_bits: int) -> SolveResult:
        enclosures = [
            (unit, norm_error(alpha, beta, unit.value, current_bits)) for unit in units
        ]
        unit, best = min(enclosures, key=lambda item: (item[1].hi, item[0].value))
        for other, enclosure in enclosures:
            if other is not unit and not best.certainly_lt(enclosure):
                raise PrecisionError(
                    f"Cannot rank q={unit.value} against q={other.value}",
                    2 * current_bits,
                )
        return SolveResult.build(
            q=unit,
            error_lo=best.lo,
            error_hi=best.hi,
            exact=False,
            bits=current_bits,
            **common,
        )

    return retry_precision(attempt, bits)


def _target_position(beta: RealSpec, bits: int) -> Tuple[Fraction, Fraction]:
    """z = β mod 1 with the radius of its enclosure"""
    if beta.is_rational:
        value = beta.exact_value
        return value - floor(value), Fraction(0)
    enclosure = beta.enclosure(bits)
    middle = enclosure.midpoint
    return middle - floor(middle), enclosure.radius


def solve_inhomogeneous(
    params: SUnitParams,
    alpha: RealSpec,
    beta: RealSpec,
    N: int,
    mode: str = "brute",
    delta=None,
    eps: Optional[float] = None,
    bits: Optional[int] = None,
    seed: int = 0,
    budget: Optional[int] = None,
) -> SolveResult:
    mode = validate_choice_arg("mode", mode, MODES)
    oracle = brute_force_best(params, alpha, beta, N, bits, budget)
    if mode == "brute":
        return oracle

    bits = bits or config.default_bits()
    if delta is None:
        delta = config.main_config.get("pipeline", "delta")
    delta = validate_fraction_arg("delta", delta)
    eps = config.main_config.getfloat("pipeline", "eps") if eps is None else eps
    anchor_limit = certified_floor_power(N, 1 / (1 + delta))
    z, radius = _target_position(beta, bits)

    try:
        A, Q = dirichlet_approx(alpha, max(anchor_limit, 1), bits)
        cfg = PipelineConfig(params, A, Q, delta, eps, (z,), seed=seed)
        report = run_theorem1(cfg, threads=1, budget=budget)
        unit = report.results[0].q_star
        if unit.value > N:
            raise PreconditionError(f"q*={unit.value} exceeds N={N}")
    except (DegenerateInputError, PreconditionError, DomainError) as error:
        warnings.warn(f"Pipeline declined, falling back to brute force: {error}")
        logger.info("Pipeline fallback for N=%d: %s", N, error)
        data = oracle.to_dict()
        data.update(mode="pipeline", fallback=True, reason=str(error))
        return SolveResult.from_dict(data)

    error = norm_error(alpha, beta, unit.value, bits)
    if error.certainly_lt(oracle.error):
        raise ConsistencyError(
            f"Pipeline error {error} beats the exhaustive minimum {oracle.error}"
        )
    return SolveResult.build(
        q=unit,
        mode="pipeline",
        N=N,
        error_lo=error.lo,
        error_hi=error.hi,
        exact=error.is_point,
        fallback=False,
        reason=f"target radius {radius}" if radius else None,
        bits=None if error.is_point else bits,
        A=A,
        Q=Q,
        z=z,
    )


def triple_log_bound(x: float, eps: float) -> Optional[float]:
    """1 / (log log log x)^(1/8 - ε), undefined until log log log x > 1"""
    if x <= 16:
        return None
    value = log(log(log(x)))
    if value <= 1:
        return None
    return 1 / value ** (0.125 - eps)


@class_decorator
class UniformReport(BaseObject):
    N = IntegerField()
    witness = RecordField(PsiWitness)
    violation = BooleanField()
    pipeline = RecordField(PipelineReport)
    pipeline_error = StringField()
    count = IntegerField()
    dispersion = FractionField()
    asymptotic_bound = FloatField()
    vacuous = BooleanField()

    _string_format = "N={N} violation={violation} dispersion={dispersion}"


def solve_uniform(
    params: SUnitParams,
    alpha: RealSpec,
    psi: PsiSpec,
    N: int,
    delta=None,
    eps: Optional[float] = None,
    bits: Optional[int] = None,
    seed: int = 0,
    budget: Optional[int] = None,
) -> UniformReport:
    witness = psi_bad_witness(alpha, psi, N, bits)
    if not witness.ok:
        return UniformReport.build(N=N, witness=witness, violation=True)

    if delta is None:
        delta = config.main_config.get("pipeline", "delta")
    delta = validate_fraction_arg("delta", delta)
    eps = config.main_config.getfloat("pipeline", "eps") if eps is None else eps
    pipeline = pipeline_error = None
    try:
        cfg = PipelineConfig(
            params, witness.A, witness.Q, delta, eps, UNIFORM_TARGETS, seed=seed
        )
        pipeline = run_theorem1(cfg, budget=budget)
    except (DegenerateInputError, PreconditionError, DomainError) as error:
        pipeline_error = str(error)
        logger.info("No pipeline for Q=%d: %s", witness.Q, error)

    top = certified_floor_power(witness.Q, 1 + delta)
    points = sigma_alpha(params, top, Angle(witness.A, witness.Q), budget)
    bound = triple_log_bound(psi.inverse(N), eps)
    return UniformReport.build(
        N=N,
        witness=witness,
        violation=False,
        pipeline=pipeline,
        pipeline_error=pipeline_error,
        count=len(points),
        dispersion=dispersion(points),
        asymptotic_bound=bound,
        vacuous=bound is None or bound >= 0.5,
    )


@class_decorator
class DensityReport(BaseObject):
    """Dispersion of Σ_α(Q^exponent) against the triple-log bound"""

    a = IntegerField()
    b = IntegerField()
    alpha = AngleField()
    Q = IntegerField()
    exponent = FractionField()
    bound = IntegerField()
    count = IntegerField()
    dispersion = FractionField()
    asymptotic_bound = FloatField()
    defined = BooleanField()
    vacuous = BooleanField()
    within_bound = BooleanField()

    _string_format = (
        "Q={Q} dispersion={dispersion} bound={asymptotic_bound} vacuous={vacuous}"
    )


def measure_density(
    params: SUnitParams,
    alpha: Angle,
    exponent,
    eps: Optional[float] = None,
    budget: Optional[int] = None,
) -> DensityReport:
    Q = alpha.den
    if Q < 2:
        raise DomainError(f"Need Q >= 2, got α={alpha}")
    exponent = validate_fraction_arg("exponent", exponent)
    eps = config.main_config.getfloat("pipeline", "eps") if eps is None else eps
    top = certified_floor_power(Q, exponent)
    points = sigma_alpha(params, top, alpha, budget)
    measured = dispersion(points)
    asymptotic_bound = triple_log_bound(Q, eps)
    return DensityReport.build(
        a=params.a,
        b=params.b,
        alpha=alpha,
        Q=Q,
        exponent=exponent,
        bound=top,
        count=len(points),
        dispersion=measured,
        asymptotic_bound=asymptotic_bound,
        defined=asymptotic_bound is not None,
        vacuous=asymptotic_bound is None or asymptotic_bound >= 0.5,
        within_bound=asymptotic_bound is None or measured <= asymptotic_bound,
    )


def density_table(
    params: SUnitParams,
    Qs: Sequence[int],
    exponent,
    seed: int = 0,
    eps: Optional[float] = None,
) -> List[DensityReport]:
    """One seeded random A coprime to each Q"""
    rng = make_rng(seed)
    reports = []
    for Q in Qs:
        while True:
            A = int(rng.integers(1, Q))
            if gcd(A, Q) == 1:
                break
        reports.append(measure_density(params, Angle(A, Q), exponent, eps))
    return reports
