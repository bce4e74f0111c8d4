"""Tests for the spectral residual solver."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from specres.config import SolverConfig
from specres.const import RULE_NAMES
from specres.problem import EvalCounter, NonlinearProblem
from specres.problems import linear_spd, problem_from_uri, standard_suite
from specres.results import (
    COND_LIN1,
    COND_LIN2,
    SIGN_MINUS,
    SIGN_PLUS,
    TRACE_COLUMNS,
    SolverStatus,
    residual_norm,
    trace_to_csv,
    write_trace_csv,
)
from specres.solver import (
    BacktrackExhaustedError,
    FevalBudgetExhaustedError,
    check_lin1,
    check_lin2,
    expected_f_evals,
    linesearch,
    solve,
    solve_sequence,
)

from .conftest import make_linear, make_problem

_TRACE_COMPLETE = (
    SolverStatus.CONVERGED,
    SolverStatus.FAIL_ITER,
    SolverStatus.FAIL_STAGNATION,
)


def _sqrt_growth(c: list[float]) -> NonlinearProblem:
    """F(x) = c (1 + sqrt(||x||)): every step away from 0 increases ||F||."""
    vec = np.asarray(c, dtype=float)
    return make_problem(
        lambda x: vec * (1.0 + np.sqrt(np.linalg.norm(x))),
        [0.0] * vec.size,
        label="sqrt-growth",
    )


# ---------------------------------------------------------------------------
# Acceptance tests
# ---------------------------------------------------------------------------


def test_lin1() -> None:
    """Sufficient decrease against (1 - rho (1 + gamma)) ||F_k||."""
    assert check_lin1(0.5, 1.0, 1.0, 1e-4)
    assert not check_lin1(1.0, 1.0, 1.0, 1e-4)
    assert check_lin1(1.0 - 2e-4, 1.0, 1.0, 1e-4)


def test_lin2() -> None:
    """Norm growth up to (1 + eta_k - rho gamma) is accepted."""
    assert check_lin2(1.5, 1.0, 1.0, 1e-4, 1.0)
    assert not check_lin2(1.5, 1.0, 1.0, 1e-4, 0.0)
    assert not check_lin2(1.0, 1.0, 1.0, 1e-4, 0.0)


# ---------------------------------------------------------------------------
# Linesearch
# ---------------------------------------------------------------------------


def test_linesearch_accepts_minus_lazily() -> None:
    """F = x: the minus step hits the root with one evaluation."""
    problem = make_linear(np.eye(2))
    counter = EvalCounter()
    x = np.array([1.0, 0.0])
    step = linesearch(problem, x, x.copy(), 1.0, SolverConfig(), counter, 1.0)
    assert step.sign == SIGN_MINUS
    assert step.condition == COND_LIN1
    assert step.backtracks == 0
    assert step.gamma == 1.0
    assert step.f_next == 0.0
    assert counter.f_evals == 1


def test_linesearch_takes_plus_direction() -> None:
    """F = -x: the minus step doubles ||F||, the plus step solves."""
    problem = make_linear(-np.eye(2))
    counter = EvalCounter()
    x = np.array([1.0, 0.0])
    step = linesearch(problem, x, -x, 1.0, SolverConfig(), counter, 0.0)
    assert step.sign == SIGN_PLUS
    assert step.condition == COND_LIN1
    np.testing.assert_allclose(step.x_next, [0.0, 0.0])
    assert counter.f_evals == 2


def test_linesearch_exhausts_backtracks() -> None:
    """Two evaluations per level, 41 levels with the default budget."""
    problem = _sqrt_growth([1.0, 0.0])
    counter = EvalCounter()
    f0 = problem.residual(problem.initial_point)
    with pytest.raises(BacktrackExhaustedError):
        linesearch(
            problem, problem.initial_point, f0, 1.0, SolverConfig(), counter, 1e-12
        )
    assert counter.f_evals == 82


def test_linesearch_respects_feval_budget() -> None:
    """No trial is evaluated once the budget is spent."""
    problem = make_linear(np.eye(2))
    counter = EvalCounter(f_evals=3)
    x = np.array([1.0, 0.0])
    with pytest.raises(FevalBudgetExhaustedError):
        linesearch(problem, x, x, 1.0, SolverConfig(max_fevals=3), counter, 1.0)
    assert counter.f_evals == 3


def test_linesearch_rejects_zero_residual() -> None:
    """F_k = 0 means the caller should have stopped."""
    problem = make_linear(np.eye(2))
    with pytest.raises(ValueError, match="F_k"):
        linesearch(
            problem, np.zeros(2), np.zeros(2), 1.0, SolverConfig(), EvalCounter(), 1.0
        )


# ---------------------------------------------------------------------------
# Solver loop
# ---------------------------------------------------------------------------


def test_solve_one_step(shifted_identity: NonlinearProblem) -> None:
    """F = x - c from 0 is solved by the first minus step."""
    report = solve(shifted_identity)
    assert report.status is SolverStatus.CONVERGED
    assert report.iterations == 1
    assert report.f_evals == 2
    np.testing.assert_allclose(report.x, [1.0, 2.0, 3.0])


def test_solve_at_root() -> None:
    """F(x_0) = 0 returns immediately after one evaluation."""
    problem = make_linear(np.eye(3), x0=[1.0, 2.0, 3.0], rhs=[1.0, 2.0, 3.0])
    report = solve(problem)
    assert report.converged
    assert report.iterations == 0
    assert report.f_evals == 1
    assert report.trace == []


@pytest.mark.parametrize("rule", RULE_NAMES)
def test_every_rule_solves_diagonal(rule: str, diag_problem: NonlinearProblem) -> None:
    """All eight rules converge on diag(1, 10)."""
    report = solve(diag_problem, SolverConfig().with_rule(rule))
    assert report.converged
    assert report.f_norm <= 1e-6
    assert report.solver == rule


def test_trace_respects_norm_bound(diag_problem: NonlinearProblem) -> None:
    """Every accepted step satisfies ||F_{k+1}|| <= (1 + eta_k) ||F_k||."""
    report = solve(diag_problem, SolverConfig().with_rule("BB2"))
    assert report.converged
    for record in report.trace:
        assert record.f_next <= (1.0 + record.eta) * record.f_norm
        assert record.condition in (COND_LIN1, COND_LIN2)
    assert expected_f_evals(report.trace) == report.f_evals
    assert report.trace[-1].f_evals == report.f_evals


@pytest.mark.parametrize("rule", RULE_NAMES)
def test_standard_suite_contract(rule: str) -> None:
    """Norm bound, tolerance and evaluation accounting on the standard suite."""
    config = SolverConfig().with_rule(rule)
    for problem in standard_suite():
        report = solve(problem, config)
        for record in report.trace:
            assert record.f_next <= (1.0 + record.eta) * record.f_norm
        if report.converged:
            assert report.f_norm <= 1e-6
        if report.status in _TRACE_COMPLETE:
            assert expected_f_evals(report.trace) == report.f_evals, problem.label


@pytest.mark.parametrize(
    ("uri", "rule"),
    [
        ("linear:nonsym:50", "BB1"),
        ("broyden:100", "ABBm08"),
        ("trigonometric:100", "DABBm"),
        ("contact:8:mixed:1", "BB2"),
        ("contact:25:adhesion-heavy:2", "DABBm"),
    ],
)
def test_trace_replays_the_iteration(uri: str, rule: str) -> None:
    """Every record rebuilds its step and the acceptance test that fired."""
    problem = problem_from_uri(uri)
    config = SolverConfig().with_rule(rule)
    report = solve(problem, config)
    assert report.trace

    x = problem.initial_point.astype(float, copy=True)
    f_vec = problem.residual(x)
    f0_norm = residual_norm(f_vec)
    eta_sum = 0.0
    for record in report.trace:
        assert record.f_norm == pytest.approx(residual_norm(f_vec), rel=1e-12)
        assert record.gamma == config.sigma**record.backtracks
        assert record.eta == config.eta(record.k, f0_norm)

        # p_k = -/+ gamma beta F_k
        x_next = x + record.step_scale * f_vec
        f_next = problem.residual(x_next)
        assert residual_norm(f_next) == pytest.approx(record.f_next, rel=1e-12)

        if record.condition == COND_LIN2:
            other = residual_norm(problem.residual(x - record.step_scale * f_vec))
            for trial in (record.f_next, other):
                assert not check_lin1(trial, record.f_norm, record.gamma, config.rho)
            assert check_lin2(
                record.f_next, record.f_norm, record.gamma, config.rho, record.eta
            )
        else:
            assert check_lin1(record.f_next, record.f_norm, record.gamma, config.rho)

        eta_sum += record.eta
        assert record.f_next <= f0_norm * math.exp(min(eta_sum, 700.0))
        x, f_vec = x_next, f_next

    np.testing.assert_allclose(x, report.x, rtol=1e-9, atol=1e-12)


def test_solve_spd_system() -> None:
    """A moderately conditioned SPD system converges with DABBm."""
    problem = linear_spd(50, 1e3)
    report = solve(problem)
    assert report.converged
    assert problem.solution is not None
    assert np.linalg.norm(report.x - problem.solution) < 1e-3


def test_stagnation() -> None:
    """A constant residual is never reduced: stop after the window."""
    problem = make_problem(lambda x: np.ones(2), [0.0, 0.0])
    report = solve(problem)
    assert report.status is SolverStatus.FAIL_STAGNATION
    assert report.status.flag == "incr"
    assert report.iterations == 50
    assert report.f_evals == 1 + 2 * 50
    assert report.fallbacks == 50


def test_iteration_limit(diag_problem: NonlinearProblem) -> None:
    """max_iters = 1 stops after one accepted step."""
    report = solve(diag_problem, SolverConfig(max_iters=1))
    assert report.status is SolverStatus.FAIL_ITER
    assert report.iterations == 1
    assert report.status.flag == "it"


def test_feval_limit(diag_problem: NonlinearProblem) -> None:
    """The budget counts F(x_0) and stops before a third evaluation."""
    report = solve(diag_problem, SolverConfig(max_fevals=2))
    assert report.status is SolverStatus.FAIL_FEVALS
    assert report.f_evals == 2
    assert report.iterations == 0


def test_backtrack_failure() -> None:
    """No growth allowance and no backtracks: the first level fails."""
    problem = _sqrt_growth([1e-3, 0.0])
    config = SolverConfig(max_backtracks=0, eta_offset=0.0)
    report = solve(problem, config)
    assert report.status is SolverStatus.FAIL_BACKTRACKS
    assert report.status.flag == "sigma"
    assert report.f_evals == 3


def test_solve_sequence_warm_start(shifted_identity: NonlinearProblem) -> None:
    """The second solve starts at the first solution."""
    reports = solve_sequence([shifted_identity, shifted_identity])
    assert [r.iterations for r in reports] == [1, 0]

    cold = solve_sequence([shifted_identity, shifted_identity], warm_start=False)
    assert [r.iterations for r in cold] == [1, 1]


def test_trace_csv(diag_problem: NonlinearProblem, tmp_path: Path) -> None:
    """Trace CSV has one row per iteration."""
    report = solve(diag_problem)
    text = trace_to_csv(report)
    lines = text.splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == report.iterations + 1

    path = write_trace_csv(report, tmp_path / "trace.csv")
    assert path.read_text(encoding="utf-8") == text


def test_summary_mentions_status(diag_problem: NonlinearProblem) -> None:
    """The summary names the problem, the rule and the status."""
    report = solve(diag_problem, SolverConfig(max_iters=1))
    summary = report.summary()
    assert "diag" in summary
    assert "DABBm" in summary
    assert "fail_iter (it)" in summary
