"""
Benchmark grid runner and performance profiles.

A grid runs every solver on every problem.  Each run is a blocking solve
handed to a thread pool; a crash in one run becomes a ``crashed`` result
and never aborts the grid.  Profiles use F-evaluations as the cost.
"""

from __future__ import annotations

import asyncio
import logging
import math
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .config import SolverConfig, TrustRegionConfig
from .const import RULE_NAMES, SOLVER_NEWTON
from .newton import solve_newton_tr
from .problem import NonlinearProblem
from .results import SolverReport, SolverStatus
from .solver import solve
from .steplength import rule_from_name

_LOGGER = logging.getLogger(__name__)

KIND_SRAND = "srand"
KIND_NEWTON = "newton"

# Largest tau shown on profile plots
TAU_CAP = 2.0**10


@dataclass(frozen=True)
class SolverSpec:
    """A named solver with its configuration."""

    name: str
    kind: str = KIND_SRAND
    config: SolverConfig | None = None
    tr_config: TrustRegionConfig | None = None

    def run(self, problem: NonlinearProblem) -> SolverReport:
        """Solve ``problem`` with this solver."""
        if self.kind == KIND_NEWTON:
            return solve_newton_tr(problem, self.tr_config)
        return solve(problem, self.config)


def solver_spec(name: str, tol: float | None = None) -> SolverSpec:
    """
    Build a solver spec from a rule label or ``newton``.

    Raises KeyError for unknown names.
    """
    if name.lower() == SOLVER_NEWTON:
        tr_config = TrustRegionConfig() if tol is None else TrustRegionConfig(tol=tol)
        return SolverSpec(SOLVER_NEWTON, KIND_NEWTON, tr_config=tr_config)
    rule = rule_from_name(name)
    if tol is None:
        return SolverSpec(rule.name, KIND_SRAND, config=SolverConfig(rule=rule))
    return SolverSpec(rule.name, KIND_SRAND, config=SolverConfig(rule=rule, tol=tol))


def default_solver_specs(
    rules: Sequence[str] | None = None, *, newton: bool = True
) -> list[SolverSpec]:
    """The steplength rules (all eight by default) followed by the baseline."""
    specs = [solver_spec(name) for name in (rules or RULE_NAMES)]
    if newton:
        specs.append(solver_spec(SOLVER_NEWTON))
    return specs


@dataclass(frozen=True)
class RunResult:
    """One cell of the benchmark grid."""

    solver: str
    problem: str
    status: SolverStatus
    f_evals: int
    wall_time: float
    f_norm: float
    message: str = ""

    @property
    def converged(self) -> bool:
        """Return True if the run converged."""
        return self.status is SolverStatus.CONVERGED

    @property
    def wall_ms(self) -> float:
        """Wall time in milliseconds."""
        return 1000.0 * self.wall_time


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


def run_one(spec: SolverSpec, problem: NonlinearProblem) -> RunResult:
    """Run one cell, turning any exception into a crashed result."""
    start = time.perf_counter()
    try:
        report = spec.run(problem)
    except Exception as err:  # noqa: BLE001
        _LOGGER.exception("%s crashed on %s", spec.name, problem.label)
        return RunResult(
            solver=spec.name,
            problem=problem.label,
            status=SolverStatus.CRASHED,
            f_evals=0,
            wall_time=time.perf_counter() - start,
            f_norm=math.inf,
            message=f"{type(err).__name__}: {err}",
        )
    return RunResult(
        solver=spec.name,
        problem=problem.label,
        status=report.status,
        f_evals=report.f_evals,
        wall_time=time.perf_counter() - start,
        f_norm=report.f_norm,
        message=report.message,
    )


async def async_run_grid(
    problems: Sequence[NonlinearProblem],
    specs: Sequence[SolverSpec],
    parallelism: int = 1,
) -> list[RunResult]:
    """
    Run every solver on every problem in a thread pool.

    Results are ordered by solver, then problem, whatever the parallelism.
    """
    if not problems or not specs:
        msg = "A grid needs at least one problem and one solver"
        raise ValueError(msg)
    if parallelism < 1:
        msg = f"Parallelism must be at least 1, got {parallelism}"
        raise ValueError(msg)

    _LOGGER.info(
        "Running %d solvers x %d problems with %d workers",
        len(specs),
        len(problems),
        parallelism,
    )
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=parallelism) as executor:
        jobs = [
            loop.run_in_executor(executor, run_one, spec, problem)
            for spec in specs
            for problem in problems
        ]
        results = await asyncio.gather(*jobs)

    crashed = sum(result.status is SolverStatus.CRASHED for result in results)
    if crashed:
        _LOGGER.warning("%d of %d runs crashed", crashed, len(results))
    return list(results)


def run_grid(
    problems: Sequence[NonlinearProblem],
    specs: Sequence[SolverSpec],
    parallelism: int = 1,
) -> list[RunResult]:
    """Blocking wrapper around async_run_grid."""
    return asyncio.run(async_run_grid(problems, specs, parallelism))


# ---------------------------------------------------------------------------
# Performance profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileTable:
    """
    Cost matrix and ratios of a grid.

    ``costs[p, s]`` is the F-evaluation count of solver ``s`` on problem
    ``p`` (inf when it failed).  Problems no solver solved keep inf ratios
    for everyone: they stay in the denominator and count as unsolved.
    """

    solvers: list[str]
    problems: list[str]
    costs: NDArray[np.float64]
    ratios: NDArray[np.float64] = field(init=False)

    def __post_init__(self) -> None:
        best = self.costs.min(axis=1, initial=math.inf, keepdims=True)
        with np.errstate(invalid="ignore"):
            ratios = np.where(np.isfinite(best), self.costs / best, math.inf)
        object.__setattr__(self, "ratios", ratios)

    def _column(self, solver: str) -> NDArray[np.float64]:
        try:
            return self.ratios[:, self.solvers.index(solver)]
        except ValueError as err:
            msg = f"Solver {solver!r} is not in the profile"
            raise KeyError(msg) from err

    @property
    def unsolved(self) -> list[str]:
        """Problems no solver solved."""
        mask = ~np.isfinite(self.costs).any(axis=1)
        return [name for name, hit in zip(self.problems, mask, strict=True) if hit]

    def rho(self, solver: str, tau: float) -> float:
        """Fraction of problems solved within a factor ``tau`` of the best."""
        column = self._column(solver)
        return float(np.count_nonzero(column <= tau)) / len(self.problems)

    @property
    def tau_max(self) -> float:
        """Smallest power of two covering every finite ratio, capped at 2^10."""
        finite = self.ratios[np.isfinite(self.ratios)]
        if finite.size == 0:
            return 1.0
        return min(2.0 ** math.ceil(math.log2(float(finite.max()))), TAU_CAP)

    def step_vertices(self, solver: str) -> list[tuple[float, float]]:
        """
        Vertices of the right-continuous step curve of ``solver`` on
        ``[1, tau_max]``: a horizontal run then a jump at every ratio.
        """
        column = self._column(solver)
        tau_max = self.tau_max
        vertices = [(1.0, self.rho(solver, 1.0))]
        for jump in np.unique(column[(column > 1.0) & (column <= tau_max)]):
            tau = float(jump)
            vertices.append((tau, vertices[-1][1]))
            vertices.append((tau, self.rho(solver, tau)))
        if vertices[-1][0] < tau_max:
            vertices.append((tau_max, vertices[-1][1]))
        return vertices


def performance_profile(results: Sequence[RunResult]) -> ProfileTable:
    """Profile table over the solvers and problems present in ``results``."""
    if not results:
        msg = "A performance profile needs at least one result"
        raise ValueError(msg)
    solvers = list(dict.fromkeys(result.solver for result in results))
    problems = list(dict.fromkeys(result.problem for result in results))
    costs = np.full((len(problems), len(solvers)), math.inf)
    seen: set[tuple[str, str]] = set()
    for result in results:
        key = (result.solver, result.problem)
        if key in seen:
            msg = f"Duplicate result for solver {key[0]!r} on {key[1]!r}"
            raise ValueError(msg)
        seen.add(key)
        if result.converged:
            row = problems.index(result.problem)
            costs[row, solvers.index(result.solver)] = result.f_evals
    table = ProfileTable(solvers, problems, costs)
    if table.unsolved:
        _LOGGER.debug("Unsolved by every solver: %s", ", ".join(table.unsolved))
    return table


@dataclass(frozen=True)
class SolvedSummary:
    """Solved count of one solver."""

    solver: str
    solved: int
    total: int

    @property
    def failures(self) -> int:
        """Number of runs that did not converge."""
        return self.total - self.solved

    @property
    def percentage(self) -> float:
        """Solved share in percent."""
        return 100.0 * self.solved / self.total if self.total else 0.0

    def __str__(self) -> str:
        noun = "failure" if self.failures == 1 else "failures"
        return f"{self.percentage:.1f}% ({self.failures} {noun})"


def solved_summary(results: Sequence[RunResult]) -> list[SolvedSummary]:
    """Solved share per solver, in first-appearance order."""
    summaries: dict[str, list[int]] = {}
    for result in results:
        counts = summaries.setdefault(result.solver, [0, 0])
        counts[0] += result.converged
        counts[1] += 1
    return [
        SolvedSummary(solver, solved, total)
        for solver, (solved, total) in summaries.items()
    ]
