"""
Spectral residual solver with a double-direction nonmonotone linesearch.

Every iteration steps along the residual, ``x_{k+1} = x_k -/+ gamma * beta_k
* F_k``.  At each backtracking level both directions are tried against a
sufficient decrease test (lin1) first and then against the approximate norm
descent test (lin2), which allows ``||F||`` to grow by at most a summable
factor ``1 + eta_k``.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace

from .config import SolverConfig
from .problem import EvalCounter, NonlinearProblem, SpecresError, Vector, evaluate
from .results import (
    COND_LIN1,
    COND_LIN2,
    SIGN_MINUS,
    SIGN_PLUS,
    IterationRecord,
    SolverReport,
    SolverStatus,
    residual_norm,
)
from .steplength import SteplengthState, choose_beta, threshold

_LOGGER = logging.getLogger(__name__)


class LinesearchError(SpecresError):
    """The linesearch could not produce a step."""


class BacktrackExhaustedError(LinesearchError):
    """No direction was accepted within the backtracking budget."""


class FevalBudgetExhaustedError(LinesearchError):
    """The residual evaluation budget ran out during the linesearch."""


# ---------------------------------------------------------------------------
# Acceptance tests
# ---------------------------------------------------------------------------


def check_lin1(f_trial: float, f_curr: float, gamma: float, rho: float) -> bool:
    """Sufficient decrease: f_trial <= (1 - rho (1 + gamma)) f_curr."""
    return f_trial <= (1.0 - rho * (1.0 + gamma)) * f_curr


def check_lin2(
    f_trial: float, f_curr: float, gamma: float, rho: float, eta_k: float
) -> bool:
    """Approximate norm descent: f_trial <= (1 + eta_k - rho gamma) f_curr."""
    return f_trial <= (1.0 + eta_k - rho * gamma) * f_curr


# ---------------------------------------------------------------------------
# Linesearch
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinesearchStep:
    """Accepted trial of the linesearch."""

    p: Vector
    gamma: float
    sign: str
    backtracks: int
    x_next: Vector
    f_next_vec: Vector
    f_next: float
    condition: str


def _trial(
    problem: NonlinearProblem,
    x_k: Vector,
    p: Vector,
    config: SolverConfig,
    counter: EvalCounter,
) -> tuple[Vector, Vector, float]:
    if counter.f_evals >= config.max_fevals:
        msg = f"Residual evaluation budget of {config.max_fevals} exhausted"
        raise FevalBudgetExhaustedError(msg)
    x_trial = x_k + p
    f_trial = evaluate(problem, x_trial, counter)
    return x_trial, f_trial, residual_norm(f_trial)


def linesearch(  # noqa: PLR0913
    problem: NonlinearProblem,
    x_k: Vector,
    f_k: Vector,
    beta_k: float,
    config: SolverConfig,
    counter: EvalCounter,
    eta_k: float,
) -> LinesearchStep:
    """
    Backtrack along -/+ beta_k F_k until a trial is accepted.

    At each level gamma the order is: minus direction against lin1, plus
    direction against lin1, minus against lin2, plus against lin2.  The
    plus direction is only evaluated when the minus direction fails lin1,
    and both trial values are reused for the lin2 tests.
    """
    f_norm = residual_norm(f_k)
    if f_norm == 0.0 or beta_k == 0.0:
        msg = "linesearch needs F_k != 0 and beta_k != 0"
        raise ValueError(msg)

    rho = config.rho
    gamma = 1.0
    for bt in range(config.max_backtracks + 1):
        scale = gamma * beta_k
        p_minus = -scale * f_k
        x_minus, f_minus, n_minus = _trial(problem, x_k, p_minus, config, counter)
        if check_lin1(n_minus, f_norm, gamma, rho):
            return LinesearchStep(
                p_minus, gamma, SIGN_MINUS, bt, x_minus, f_minus, n_minus, COND_LIN1
            )

        p_plus = scale * f_k
        x_plus, f_plus, n_plus = _trial(problem, x_k, p_plus, config, counter)
        if check_lin1(n_plus, f_norm, gamma, rho):
            return LinesearchStep(
                p_plus, gamma, SIGN_PLUS, bt, x_plus, f_plus, n_plus, COND_LIN1
            )

        if check_lin2(n_minus, f_norm, gamma, rho, eta_k):
            return LinesearchStep(
                p_minus, gamma, SIGN_MINUS, bt, x_minus, f_minus, n_minus, COND_LIN2
            )
        if check_lin2(n_plus, f_norm, gamma, rho, eta_k):
            return LinesearchStep(
                p_plus, gamma, SIGN_PLUS, bt, x_plus, f_plus, n_plus, COND_LIN2
            )
        gamma *= config.sigma

    msg = f"No step accepted after {config.max_backtracks} backtracks"
    raise BacktrackExhaustedError(msg)


def expected_f_evals(trace: Sequence[IterationRecord]) -> int:
    """
    Residual evaluations implied by a trace.

    One for F(x_0), two per rejected level, and one or two for the
    accepted level depending on whether the plus direction was needed.
    """
    total = 1
    for record in trace:
        lazy = record.sign == SIGN_MINUS and record.condition == COND_LIN1
        total += 2 * record.backtracks + (1 if lazy else 2)
    return total


# ---------------------------------------------------------------------------
# Solver loop
# ---------------------------------------------------------------------------


def _report(  # noqa: PLR0913
    status: SolverStatus,
    problem: NonlinearProblem,
    config: SolverConfig,
    x: Vector,
    f_norm: float,
    counter: EvalCounter,
    trace: list[IterationRecord],
    state: SteplengthState,
    message: str = "",
) -> SolverReport:
    report = SolverReport(
        status=status,
        x=x,
        f_norm=f_norm,
        f_evals=counter.f_evals,
        iterations=len(trace),
        trace=trace,
        solver=config.rule.name,
        problem=problem.label,
        fallbacks=state.fallbacks,
        message=message,
    )
    _LOGGER.info(
        "%s on %s: %s after %d iterations, %d F-evaluations, ||F||=%.3e",
        config.rule.name,
        problem.label,
        status.value,
        report.iterations,
        report.f_evals,
        f_norm,
    )
    return report


def solve(
    problem: NonlinearProblem, config: SolverConfig | None = None
) -> SolverReport:
    """Solve F(x) = 0 with the spectral residual method."""
    cfg = config or SolverConfig()
    counter = EvalCounter()
    state = SteplengthState.for_rule(
        cfg.rule, cfg.beta_min, cfg.beta_max, cfg.beta0
    )

    x = problem.initial_point.astype(float, copy=True)
    f_vec = evaluate(problem, x, counter)
    f_norm = residual_norm(f_vec)
    f0_norm = f_norm
    trace: list[IterationRecord] = []

    beta = threshold(cfg.beta0, cfg.beta_min, cfg.beta_max)
    fallback = False
    best = f_norm
    since_best = 0
    k = 0

    def finish(status: SolverStatus, message: str = "") -> SolverReport:
        return _report(
            status, problem, cfg, x, f_norm, counter, trace, state, message
        )

    while f_norm > cfg.tol:
        if since_best >= cfg.stagnation_window:
            msg = f"||F|| not reduced for {cfg.stagnation_window} iterations"
            return finish(SolverStatus.FAIL_STAGNATION, msg)
        if k >= cfg.max_iters:
            msg = f"Iteration limit {cfg.max_iters} reached"
            return finish(SolverStatus.FAIL_ITER, msg)

        eta_k = cfg.eta(k, f0_norm)
        try:
            step = linesearch(problem, x, f_vec, beta, cfg, counter, eta_k)
        except BacktrackExhaustedError as err:
            return finish(SolverStatus.FAIL_BACKTRACKS, str(err))
        except FevalBudgetExhaustedError as err:
            return finish(SolverStatus.FAIL_FEVALS, str(err))

        trace.append(
            IterationRecord(
                k=k,
                beta=beta,
                gamma=step.gamma,
                sign=step.sign,
                backtracks=step.backtracks,
                f_norm=f_norm,
                f_next=step.f_next,
                condition=step.condition,
                eta=eta_k,
                f_evals=counter.f_evals,
                fallback=fallback,
            )
        )

        if step.f_next < best:
            best = step.f_next
            since_best = 0
        else:
            since_best += 1

        y = step.f_next_vec - f_vec
        state.record_iteration(step.p, y, step.backtracks, step.f_next, beta)
        x, f_vec, f_norm = step.x_next, step.f_next_vec, step.f_next
        k += 1

        if f_norm > cfg.tol:
            choice = choose_beta(cfg.rule, state)
            beta, fallback = choice.beta, choice.fallback

    return finish(SolverStatus.CONVERGED)


def solve_sequence(
    problems: Sequence[NonlinearProblem],
    config: SolverConfig | None = None,
    *,
    warm_start: bool = True,
) -> list[SolverReport]:
    """
    Solve a sequence of related systems in order.

    With ``warm_start`` each system starts from the previous solution when
    the dimensions agree and the previous solve converged.
    """
    reports: list[SolverReport] = []
    previous: SolverReport | None = None
    for problem in problems:
        current = problem
        if (
            warm_start
            and previous is not None
            and previous.converged
            and previous.x.shape == (problem.dimension,)
        ):
            current = replace(problem, initial_point=previous.x.copy())
        previous = solve(current, config)
        reports.append(previous)
    solved = sum(r.converged for r in reports)
    _LOGGER.info("Sequence of %d systems: %d solved", len(reports), solved)
    return reports
