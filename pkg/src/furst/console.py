import argparse
import json
import logging
import sys
import time
import traceback
from contextlib import contextmanager
from dataclasses import dataclass, replace
from fractions import Fraction
from textwrap import wrap
from threading import Thread
from typing import Any, Iterable, List, Optional, Sequence

from . import __version__, config
from .alpha import RealSpec, baker_probe, convergents, dirichlet_approx, psi_bad_witness
from .base import BaseObject
from .circle import dispersion, sigma_alpha
from .digits import YSet, combinatorial_search
from .exceptions import DomainError, FurstError
from .harmonics import (
    iter_exp_sums,
    lemma5_scan,
    lemma6_check,
    lemma7_check,
    lemma8_search,
    mult_order,
    subgroup,
)
from .netgen import build_net, digit_set
from .pipeline import (
    MODES,
    PipelineConfig,
    measure_density,
    run_theorem1,
    solve_inhomogeneous,
)
from .store import RegressionStore
from .structure import Angle, BumpSpec, DigitSet, PointSet, PsiSpec, SUnitParams
from .sunits import QUADRANTS, LogBound, count_lattice, enumerate_sigma, gap_report
from .util import dumps, format_table, get_csv_from_rows
from .validate import validate_choice_arg, validate_min_int_arg
from .verify import LEVELS, verify_all

EXIT_CODE_SUCCESS = 0
EXIT_CODE_VERIFICATION_FAILED = 1
EXIT_CODE_EXPECTED_ERROR = 2
EXIT_CODE_USAGE = 64
EXIT_CODE_UNKNOWN_ERROR = 70

FORMATS = ("human", "json", "csv")
DEBUG_FILE = "furst-debug.txt"

logger = logging.getLogger(__name__)


def print_help(text):
    lines = wrap(text, initial_indent="  ", subsequent_indent="  ")
    print("\n  --", file=sys.stderr)
    print("\n".join(lines), file=sys.stderr)
    print(file=sys.stderr)


@contextmanager
def timed_action(message: str, enabled: bool = True):
    if not enabled:
        yield None
        return
    start = time.time()
    print(f"{message}...", end="", flush=True, file=sys.stderr)

    done = False

    def print_dots():
        while not done:
            print(".", end="", flush=True, file=sys.stderr)
            time.sleep(0.5)

    thread = Thread(target=print_dots)
    thread.daemon = True
    thread.start()

    try:
        yield start
    finally:
        elapsed = time.time() - start
        done = True
        thread.join()
        print(f" ({elapsed:.3f}s)", file=sys.stderr)


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage problems with the 64 exit code"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Options shared by every subcommand"""

    command: str
    format: str = "human"
    threads: int = 1
    bits: Optional[int] = None
    budget: Optional[int] = None
    seed: int = 0
    verbose: bool = False

    def __post_init__(self):
        validate_choice_arg("format", self.format, FORMATS)
        validate_min_int_arg("threads", self.threads, 1)
        if self.budget is not None:
            validate_min_int_arg("budget", self.budget, 1)
        if self.bits is not None:
            validate_min_int_arg("bits", self.bits, 53)
        if not 0 <= self.seed < 2**64:
            raise DomainError(
                f"Seed must be a 64-bit unsigned integer, got {self.seed}"
            )

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        fmt = args.format or config.main_config.get("run", "format")
        if args.json:
            fmt = "json"
        elif args.csv:
            fmt = "csv"
        seed = getattr(args, "seed", None)
        return cls(
            command=args.command,
            format=fmt,
            threads=args.threads or config.thread_count(),
            bits=args.bits,
            budget=args.budget,
            seed=config.main_config.getint("run", "seed") if seed is None else seed,
            verbose=args.verbose,
        )

    def apply(self):
        """Pushes the overrides into the shared configuration"""
        config.main_config.set("run", "threads", str(self.threads))
        if self.bits is not None:
            config.main_config.set("precision", "bits", str(self.bits))
        if self.budget is not None:
            config.main_config.set("limits", "element_budget", str(self.budget))


@dataclass
class Output:
    """What a subcommand emits in each of the formats"""

    payload: Any
    rows: Optional[Iterable[Sequence]] = None
    header: Sequence[str] = ()
    text: Optional[str] = None
    passed: bool = True


def record_output(record: BaseObject, rows=None, header=()) -> Output:
    return Output(record.to_json(), rows=rows, header=header)


def emit(output: Output, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        print(dumps(output.payload), file=out)
    elif fmt == "csv":
        rows = output.rows
        if rows is None:
            rows = list(_flat_items(output.payload))
        print(get_csv_from_rows(rows, output.header), end="", file=out)
    elif output.text is not None:
        print(output.text, file=out)
    elif isinstance(output.payload, dict):
        print(format_table(output.payload), end="", file=out)
    else:
        print(output.payload, file=out)


def _flat_items(payload):
    if isinstance(payload, dict):
        return [(k, v) for k, v in payload.items() if not isinstance(v, (list, dict))]
    if isinstance(payload, list):
        return [(v,) for v in payload]
    return [(payload,)]


def _params(args) -> SUnitParams:
    return SUnitParams(args.a, args.b)


def _members(text: str) -> List[int]:
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as file:
            text = file.read()
    return [int(v) for v in text.replace("\n", ",").split(",") if v.strip()]


def _points(text: str) -> PointSet:
    if text == "-":
        return PointSet.from_string(sys.stdin.read())
    with open(text, "r", encoding="utf-8") as file:
        return PointSet.from_string(file.read())


def _yset(args) -> YSet:
    members = _members(args.members)
    return YSet.synthetic(args.a, args.l, members, Angle.from_string(args.gamma))


def _rational_alpha(args) -> Angle:
    if args.alpha is not None:
        return Angle.from_string(args.alpha)
    if args.A is None or args.Q is None:
        raise DomainError("α needs --A and --Q, or --alpha p/q")
    Q = validate_min_int_arg("Q", args.Q, 1)
    return Angle.from_fraction(Fraction(args.A, Q))


def _digits(args) -> DigitSet:
    if args.digits_file:
        with open(args.digits_file, "r", encoding="utf-8") as file:
            text = file.read()
        try:
            return DigitSet.from_string(text)
        except (KeyError, TypeError, ValueError) as error:
            raise DomainError(
                f"Invalid digit set in {args.digits_file}", inner=error
            ) from error
    given = (("--a", args.a), ("--b", args.b), ("--M1", args.M1), ("--n", args.n))
    missing = [flag for flag, value in given if value is None]
    if missing:
        raise DomainError(f"digits search needs --in, or {' '.join(missing)}")
    params = SUnitParams(args.a, args.b)
    return digit_set(params, _rational_alpha(args), args.M1, args.n)


def run_sunits(args, run: RunConfig) -> Output:
    params = _params(args)
    if args.action == "enum":
        units = enumerate_sigma(params, args.M)
        return Output(
            [{"u": str(u.u), "v": str(u.v), "value": str(u.value)} for u in units],
            rows=[(u.u, u.v, u.value) for u in units],
            header=("u", "v", "value"),
            text="\n".join(str(u.value) for u in units),
        )
    if args.action == "gaps":
        beta = args.beta or config.main_config.getfloat("pipeline", "beta")
        report = gap_report(params, args.M, beta)
        return record_output(report, rows=report.pairs, header=("q", "gap"))
    if args.t is not None:
        t = Fraction(args.t)
    elif args.M is not None:
        t = LogBound(args.M)
    else:
        raise DomainError("Counting needs either --M or --t")
    return record_output(count_lattice(params, t, args.quadrant))


def run_circle(args, run: RunConfig) -> Output:
    if args.action == "dispersion":
        value = dispersion(_points(args.points), args.metric)
        return Output({"dispersion": str(value)}, text=str(value))
    points = sigma_alpha(_params(args), args.M, _rational_alpha(args))
    return Output(
        [str(p) for p in points], rows=[(str(p),) for p in points], text=str(points)
    )


def run_alpha(args, run: RunConfig) -> Output:
    if args.action == "baker":
        beta = args.beta or config.main_config.getfloat("pipeline", "beta")
        probe = baker_probe(_params(args), beta, args.q_limit, run.bits)
        rows = [(r.p, r.q, r.next_q, r.scaled) for r in probe.rows]
        return record_output(probe, rows=rows, header=("p", "q", "next_q", "scaled"))
    x = RealSpec.from_string(args.alpha)
    if args.action == "convergents":
        found = convergents(x, args.q_limit, run.bits)
        return Output(
            [{"p": str(c.p), "q": str(c.q)} for c in found],
            rows=[(c.p, c.q) for c in found],
            header=("p", "q"),
            text="\n".join(str(c) for c in found),
        )
    if args.action == "dirichlet":
        A, Q = dirichlet_approx(x, args.N, run.bits)
        return Output({"A": str(A), "Q": str(Q)}, text=f"{A}/{Q}")
    psi = PsiSpec(Fraction(args.k1), Fraction(args.k2))
    return record_output(psi_bad_witness(x, psi, args.N, run.bits))


def run_net(args, run: RunConfig) -> Output:
    report = build_net(
        _params(args), _rational_alpha(args), args.M, args.allow_collisions
    )
    payload = report.to_json()
    if not args.emit_points:
        payload.pop("net")
    rows = [(str(p),) for p in report.net] if args.emit_points else None
    return Output(payload, rows=rows)


def run_digits(args, run: RunConfig) -> Output:
    result = combinatorial_search(_digits(args), args.l, args.eps)
    return record_output(result, rows=[(x,) for x in result.stratum.members])


def run_harmonics(args, run: RunConfig) -> Output:
    params = _params(args)
    if args.action == "order":
        order = mult_order(params.b, params.a, args.l)
        return Output({"S": str(order)}, text=str(order))
    desc = subgroup(params, args.l)
    if args.action == "subgroup":
        return record_output(desc)
    if args.action == "lemma5":
        report = lemma5_scan(desc, args.tolerance, run.threads)
        sums = iter_exp_sums(desc, range(1, desc.modulus))
        rows = ((m, v.real, v.imag, v.abs) for m, v in sums)
        header = ("m", "re", "im", "abs")
        return Output(report.to_json(), rows, header, passed=report.passed)
    y = _yset(args)
    if args.action == "lemma6":
        return record_output(lemma6_check(y, desc, args.m))
    if args.action == "lemma7":
        return record_output(lemma7_check(y, desc, BumpSpec(args.H), Fraction(args.z)))
    return record_output(lemma8_search(y, desc, Fraction(args.z), args.H))


def run_pipeline(args, run: RunConfig) -> Output:
    cfg = PipelineConfig.from_file(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    with timed_action("Running", enabled=run.format == "human" and bool(args.out)):
        report = run_theorem1(cfg, threads=run.threads)
    output = record_output(report, rows=[
        (r.z, r.q_star, r.achieved, r.success) for r in report.results
    ], header=("z", "q_star", "error", "success"))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as file:
            file.write(dumps(output.payload))
            file.write("\n")
    return output


def run_solve(args, run: RunConfig) -> Output:
    result = solve_inhomogeneous(
        _params(args),
        RealSpec.from_string(args.alpha),
        RealSpec.from_string(args.beta),
        args.N,
        args.mode,
        delta=args.delta,
        bits=run.bits,
        seed=run.seed,
    )
    return record_output(result)


def run_density(args, run: RunConfig) -> Output:
    report = measure_density(
        _params(args), Angle(args.A, args.Q), Fraction(args.exponent), args.eps
    )
    return record_output(report)


def run_verify(args, run: RunConfig) -> Output:
    store = RegressionStore(args.regression_file) if args.regression_file else None
    with timed_action(f"Verifying ({args.level})", enabled=run.format == "human"):
        report = verify_all(args.level, store, run.threads, run.seed, args.only)
    rows = [
        (c.name, c.passed, c.hard, f"{c.elapsed:.3f}", c.detail)
        for c in report.criteria
    ]
    text = "\n".join(str(c) for c in report.criteria) + f"\n{report}"
    return Output(
        report.to_json(),
        rows=rows,
        header=("name", "passed", "hard", "elapsed", "detail"),
        text=text,
        passed=report.passed,
    )


COMMANDS = {
    "sunits": run_sunits,
    "circle": run_circle,
    "alpha": run_alpha,
    "net": run_net,
    "digits": run_digits,
    "harmonics": run_harmonics,
    "run": run_pipeline,
    "solve": run_solve,
    "density": run_density,
    "verify-all": run_verify,
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, help="Scan threads (FURST_THREADS)")
    common.add_argument("--verbose", action="store_true", help="Log progress to stderr")
    common.add_argument("--bits", type=int, help="Starting interval precision")
    common.add_argument("--budget", type=int, help="Element budget")
    common.add_argument("--format", choices=FORMATS, help="Output format")
    common.add_argument("--json", action="store_true", help="Same as --format json")
    common.add_argument("--csv", action="store_true", help="Same as --format csv")
    return common


def _bases(parser):
    parser.add_argument("--a", type=int, required=True, help="First base")
    parser.add_argument("--b", type=int, required=True, help="Second base")


def _alpha_args(parser):
    parser.add_argument("--A", type=int, help="Numerator of α = A/Q")
    parser.add_argument("--Q", type=int, help="Denominator of α = A/Q")
    parser.add_argument("--alpha", help="α as p/q, instead of --A and --Q")


def _spec_arg(parser):
    parser.add_argument(
        "--spec",
        "--alpha",
        dest="alpha",
        required=True,
        help="RealSpec JSON, or p/q",
    )


def create_parser():
    common = _common_parser()
    parser = ArgumentParser(
        prog="furst", description="Dense orbits of multiplicative sets on the circle"
    )
    parser.add_argument("--version", action="version", version=__version__)

    subparsers = parser.add_subparsers(dest="command", help="Available subcommands")
    subparsers.required = True

    def leaf(group, name, help_text):
        sub = group.add_parser(name, help=help_text, parents=[common])
        sub.set_defaults(action=name)
        return sub

    # "sunits" subcommands
    sunits = subparsers.add_parser("sunits", help="Elements of Σ(M)")
    sunits_actions = sunits.add_subparsers(dest="action", required=True)
    enum = leaf(sunits_actions, "enum", "List Σ(M) in order")
    _bases(enum)
    enum.add_argument("--M", type=int, required=True)
    gaps = leaf(sunits_actions, "gaps", "Consecutive gaps of Σ(M)")
    _bases(gaps)
    gaps.add_argument("--M", type=int, required=True)
    gaps.add_argument("--beta", type=float)
    count = leaf(sunits_actions, "count", "Lattice points below a line")
    _bases(count)
    count.add_argument("--M", type=int, help="Use t = ln M, decided exactly")
    count.add_argument("--t", help="Rational t")
    count.add_argument("--quadrant", choices=QUADRANTS, default="nonneg")

    # "circle" subcommands
    circle = subparsers.add_parser("circle", help="Point sets on R/Z")
    circle_actions = circle.add_subparsers(dest="action", required=True)
    disp = leaf(circle_actions, "dispersion", "Dispersion of a point file")
    disp.add_argument(
        "--points-file",
        "--points",
        dest="points",
        required=True,
        help="File of p/q lines, - for stdin",
    )
    disp.add_argument("--metric", choices=("interval", "circular"), default="interval")
    orbit = leaf(circle_actions, "sigma-alpha", "Fractional parts {qα} over Σ(M)")
    _bases(orbit)
    orbit.add_argument("--M", type=int, required=True)
    _alpha_args(orbit)

    # "alpha" subcommands
    alpha = subparsers.add_parser("alpha", help="Continued fractions")
    alpha_actions = alpha.add_subparsers(dest="action", required=True)
    conv = leaf(alpha_actions, "convergents", "Convergents up to a denominator")
    _spec_arg(conv)
    conv.add_argument("--q-limit", type=int, required=True)
    diri = leaf(alpha_actions, "dirichlet", "Dirichlet pair (A, Q) with Q <= N")
    _spec_arg(diri)
    diri.add_argument("--N", type=int, required=True)
    baker = leaf(alpha_actions, "baker", "Scaled errors of log a / log b")
    _bases(baker)
    baker.add_argument("--beta", type=float)
    baker.add_argument("--q-limit", type=int, required=True)
    psi = leaf(alpha_actions, "psi", "Check ||qα|| >= k1 q^-k2 up to N")
    _spec_arg(psi)
    psi.add_argument("--k1", required=True)
    psi.add_argument("--k2", default="1")
    psi.add_argument("--N", type=int, required=True)

    # "net" subcommands
    net = subparsers.add_parser("net", help="Δ-net construction")
    net_actions = net.add_subparsers(dest="action", required=True)
    build = leaf(net_actions, "build", "Build the net for α = p/q")
    _bases(build)
    _alpha_args(build)
    build.add_argument("--M", type=int, required=True)
    build.add_argument("--allow-collisions", action="store_true")
    build.add_argument("--emit-points", action="store_true")

    # "digits" subcommands
    digits = subparsers.add_parser("digits", help="Digit sets and strata")
    digits_actions = digits.add_subparsers(dest="action", required=True)
    search = leaf(digits_actions, "search", "Largest stratum over the grid")
    search.add_argument("--in", dest="digits_file", help="DigitSet JSON file")
    search.add_argument("--a", type=int, help="First base, without --in")
    search.add_argument("--b", type=int, help="Second base, without --in")
    _alpha_args(search)
    search.add_argument("--M1", type=int)
    search.add_argument("--n", type=int)
    search.add_argument("--l", type=int, required=True)
    search.add_argument("--eps", type=float)

    # "harmonics" subcommands
    harmonics = subparsers.add_parser("harmonics", help="Subgroups and sums")
    harmonics_actions = harmonics.add_subparsers(dest="action", required=True)
    for name, help_text in (
        ("order", "Order of b modulo a^l"),
        ("subgroup", "Describe <b> modulo a^l"),
        ("lemma5", "Scan all subgroup sums"),
        ("lemma6", "Second moment of a set over the subgroup"),
        ("lemma7", "Remainder profile of the bump average"),
        ("lemma8", "Best b^w x / a^s near z"),
    ):
        sub = leaf(harmonics_actions, name, help_text)
        _bases(sub)
        sub.add_argument("--l", type=int, required=True)
        if name == "lemma5":
            sub.add_argument("--tolerance", type=float)
        if name in ("lemma6", "lemma7", "lemma8"):
            sub.add_argument("--members", required=True, help="Comma list or @file")
            sub.add_argument("--gamma", default="0")
        if name == "lemma6":
            sub.add_argument("--m", type=int, required=True)
        if name in ("lemma7", "lemma8"):
            sub.add_argument("--z", default="0")
            sub.add_argument("--H", type=int, required=True)

    # Top level commands
    run = subparsers.add_parser("run", help="Run the full pipeline", parents=[common])
    run.add_argument("--config", required=True, help="JSON pipeline configuration")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="Write the JSON report to this file")

    solve = subparsers.add_parser(
        "solve", help="Best q in Σ(N) for ||qα - β||", parents=[common]
    )
    _bases(solve)
    solve.add_argument("--alpha", required=True)
    solve.add_argument("--beta", required=True)
    solve.add_argument("--N", type=int, required=True)
    solve.add_argument("--mode", choices=MODES, default="brute")
    solve.add_argument("--delta")
    solve.add_argument("--seed", type=int)

    density = subparsers.add_parser(
        "density", help="Dispersion of Σ_α(Q^x)", parents=[common]
    )
    _bases(density)
    density.add_argument("--A", type=int, required=True)
    density.add_argument("--Q", type=int, required=True)
    density.add_argument("--exponent", default="2")
    density.add_argument("--eps", type=float)

    verify = subparsers.add_parser(
        "verify-all", help="Run the acceptance suite", parents=[common]
    )
    verify.add_argument("level", choices=LEVELS)
    verify.add_argument("--seed", type=int)
    verify.add_argument("--regression-file", help="Regression constants file")
    verify.add_argument("--only", nargs="*", help="Run only these criteria")

    return parser


def _write_debug(error: BaseException):
    error_message = f"ERROR: {error}"
    try:
        # Try saving extra information to local file
        traceback_info = traceback.format_exc()
        version_message = f"\nVERSION: {__version__}"
        with open(DEBUG_FILE, "w") as debug_file:
            debug_file.write(error_message)
            debug_file.write(version_message)
            debug_file.write("\n\nTraceback:\n")
            debug_file.write(traceback_info)
        print_help(
            f"Details about this error were saved to {DEBUG_FILE}. Feel free to "
            "submit the file in a new issue.",
        )
    except Exception as inner:
        print("Failed saving debug information.", inner, file=sys.stderr)


def dispatch(argv: Optional[Sequence[str]] = None, out=None) -> int:
    """Runs one command line and returns its exit code"""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_CODE_USAGE
    except SystemExit as exit_request:
        # --help and --version
        return exit_request.code or EXIT_CODE_SUCCESS

    try:
        run = RunConfig.from_args(args)
        run.apply()
        if run.verbose:
            logging.basicConfig(
                level=logging.DEBUG,
                stream=sys.stderr,
                format="%(asctime)s %(name)s %(levelname)s %(message)s",
            )
        output = COMMANDS[args.command](args, run)
        emit(output, run.format, out)
        if not output.passed:
            return EXIT_CODE_VERIFICATION_FAILED
        return EXIT_CODE_SUCCESS

    # Library errors become a machine-readable object on stderr
    except FurstError as error:
        print(json.dumps(error.to_dict()), file=sys.stderr)
        if error.help_message:
            print_help(error.help_message)
        return EXIT_CODE_EXPECTED_ERROR

    # Other errors will generate a traceback dump
    except Exception as error:
        print(f"ERROR: {error}", file=sys.stderr)
        _write_debug(error)
        return EXIT_CODE_UNKNOWN_ERROR


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
