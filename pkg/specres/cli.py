"""Command line front end: solve, verify, gen and bench."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import colorlog

from .bench import default_solver_specs, run_grid, solver_spec
from .const import (
    DEFAULT_INSTANCES,
    DEFAULT_SEED,
    DOMAIN,
    ENV_SEED,
    FORMAT_CSV,
    FORMAT_SVG,
    FORMAT_TEXT,
    REGIME_MIXED,
    REGIMES,
    RULE_DABBM,
    SOLVER_NEWTON,
    SUITE_ALL,
    VERIFY_SUITES,
)
from .contact import build_contact_problem, dump_contact_problem
from .problem import SpecresError
from .problems import (
    UnknownProblemError,
    contact_suite,
    problem_from_uri,
    standard_suite,
)
from .report import emit_report, format_results_table, plot_trace
from .results import SolverStatus, write_trace_csv
from .steplength import RULES
from .verify_suite import run_verification_suite

_LOGGER = logging.getLogger(__name__)

CMD_SOLVE = "solve"
CMD_VERIFY = "verify"
CMD_GEN = "gen"
CMD_BENCH = "bench"

BENCH_STANDARD = "standard"
BENCH_CONTACT = "contact"

RESULTS_CSV = "results.csv"
PROFILE_SVG = "profile.svg"
REPORT_TXT = "report.txt"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

_LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"


@dataclass(frozen=True)
class CliConfig:
    """Parsed command line."""

    command: str
    rule: str = RULE_DABBM
    problem: str | None = None
    tol: float | None = None
    seed: int = DEFAULT_SEED
    out: Path | None = None
    parallelism: int = 1
    suite: str = SUITE_ALL
    instances: int = DEFAULT_INSTANCES
    elements: int = 100
    regime: str = REGIME_MIXED
    epsilon: float | None = None
    trace: Path | None = None
    plot: Path | None = None
    rules: tuple[str, ...] = ()
    newton: bool = True
    timing: bool = False

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> CliConfig:
        """Collect the attributes the subcommand defined."""
        values = {
            name: getattr(args, name)
            for name in cls.__dataclass_fields__
            if getattr(args, name, None) is not None
        }
        if "rules" in values:
            values["rules"] = tuple(values["rules"])
        return cls(**values)


class _UsageError(SpecresError):
    """Bad command line input detected after parsing."""


def _env_seed() -> int:
    raw = os.environ.get(ENV_SEED)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as err:
        msg = f"{ENV_SEED}={raw!r} is not an integer"
        raise _UsageError(msg) from err


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for every subcommand."""
    rule_names = ", ".join([*RULES, SOLVER_NEWTON])
    parser = argparse.ArgumentParser(
        prog=DOMAIN,
        description="Spectral residual solvers for nonlinear systems.",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log at debug level"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser(
        CMD_SOLVE,
        help="solve one problem",
        description=f"Contact URIs name their own seed; ${ENV_SEED} is not read.",
    )
    solve.add_argument(
        "--rule", default=RULE_DABBM, help=f"steplength rule, one of {rule_names}"
    )
    solve.add_argument(
        "--problem", required=True, help="builtin problem URI or serialized file"
    )
    solve.add_argument("--tol", type=float, help="residual norm tolerance")
    solve.add_argument("--trace", type=Path, help="write the iteration trace CSV")
    solve.add_argument("--plot", type=Path, help="write an SVG of the residual")

    verify = commands.add_parser(CMD_VERIFY, help="run the spectral checks")
    verify.add_argument("--suite", choices=VERIFY_SUITES, default=SUITE_ALL)
    verify.add_argument("--instances", type=int, default=DEFAULT_INSTANCES)
    verify.add_argument("--seed", type=int, help=f"random seed (default ${ENV_SEED})")

    gen = commands.add_parser(CMD_GEN, help="write a serialized contact problem")
    gen.add_argument("--elements", type=int, default=100)
    gen.add_argument("--regime", choices=REGIMES, default=REGIME_MIXED)
    gen.add_argument("--seed", type=int, help=f"random seed (default ${ENV_SEED})")
    gen.add_argument(
        "--epsilon", type=float, help="slip regularization (default: per regime)"
    )
    gen.add_argument("--out", type=Path, required=True)

    bench = commands.add_parser(
        CMD_BENCH,
        help="run a solver x problem grid",
        description=f"Suite seeds are fixed; ${ENV_SEED} is not read.",
    )
    bench.add_argument(
        "--suite", choices=[BENCH_STANDARD, BENCH_CONTACT], default=BENCH_STANDARD
    )
    bench.add_argument("--out", type=Path, required=True, help="output directory")
    bench.add_argument("--rules", nargs="+", help="rules to run (default: all)")
    bench.add_argument(
        "--no-newton",
        dest="newton",
        action="store_false",
        help="skip the Newton trust-region baseline",
    )
    bench.add_argument("--parallelism", type=int, default=1)
    bench.add_argument(
        "--timing", action="store_true", help="record wall times in the CSV"
    )
    return parser


def setup_logging(*, verbose: bool) -> None:
    """Colored stream handler on the package logger."""
    logger = logging.getLogger(DOMAIN)
    if not any(isinstance(h, colorlog.StreamHandler) for h in logger.handlers):
        handler = colorlog.StreamHandler()
        handler.setFormatter(colorlog.ColoredFormatter(_LOG_FORMAT))
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)


def _write(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _run_solve(config: CliConfig) -> int:
    try:
        spec = solver_spec(config.rule, config.tol)
    except KeyError as err:
        raise _UsageError(err.args[0]) from err
    problem = problem_from_uri(config.problem or "")
    report = spec.run(problem)
    _write(report.summary())
    if config.trace is not None:
        write_trace_csv(report, config.trace)
    if config.plot is not None:
        plot_trace(report, config.plot)
    return EXIT_OK


def _run_verify(config: CliConfig) -> int:
    if config.instances < 1:
        msg = f"--instances must be positive, got {config.instances}"
        raise _UsageError(msg)
    if config.seed < 0:
        msg = f"Seed must be non-negative, got {config.seed}"
        raise _UsageError(msg)
    report = run_verification_suite(config.suite, config.instances, config.seed)
    _write(report.format())
    return EXIT_OK if report.passed else EXIT_FAILURE


def _run_gen(config: CliConfig) -> int:
    if config.out is None:
        msg = "--out is required"
        raise _UsageError(msg)
    try:
        problem = build_contact_problem(
            config.elements, config.regime, config.seed, config.epsilon
        )
    except ValueError as err:
        raise _UsageError(str(err)) from err
    dump_contact_problem(problem, config.out)
    _write(f"{problem.label} -> {config.out}")
    return EXIT_OK


def _run_bench(config: CliConfig) -> int:
    if config.out is None:
        msg = "--out is required"
        raise _UsageError(msg)
    if config.parallelism < 1:
        msg = f"--parallelism must be positive, got {config.parallelism}"
        raise _UsageError(msg)
    try:
        specs = default_solver_specs(config.rules or None, newton=config.newton)
    except KeyError as err:
        raise _UsageError(err.args[0]) from err
    problems = contact_suite() if config.suite == BENCH_CONTACT else standard_suite()

    results = run_grid(problems, specs, config.parallelism)
    out = config.out
    emit_report(results, FORMAT_CSV, out / RESULTS_CSV, include_timing=config.timing)
    emit_report(results, FORMAT_SVG, out / PROFILE_SVG)
    emit_report(results, FORMAT_TEXT, out / REPORT_TXT)
    _write(format_results_table(results))

    crashed = [r for r in results if r.status is SolverStatus.CRASHED]
    for result in crashed:
        _LOGGER.error("%s on %s: %s", result.solver, result.problem, result.message)
    return EXIT_FAILURE if crashed else EXIT_OK


_COMMANDS = {
    CMD_SOLVE: _run_solve,
    CMD_VERIFY: _run_verify,
    CMD_GEN: _run_gen,
    CMD_BENCH: _run_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE

    setup_logging(verbose=args.verbose)
    try:
        if args.command in (CMD_VERIFY, CMD_GEN) and args.seed is None:
            args.seed = _env_seed()
        config = CliConfig.from_namespace(args)
        return _COMMANDS[config.command](config)
    except (_UsageError, UnknownProblemError) as err:
        sys.stderr.write(f"{parser.prog}: error: {err}\n")
        return EXIT_USAGE
    except SpecresError as err:
        _LOGGER.error("%s", err)
        return EXIT_FAILURE
