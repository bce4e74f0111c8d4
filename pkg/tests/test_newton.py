"""Tests for the Newton trust-region baseline."""

from __future__ import annotations

import numpy as np
import pytest

from specres.config import TrustRegionConfig
from specres.const import SOLVER_NEWTON
from specres.newton import dogleg_step, solve_newton_tr
from specres.problems import contact_suite, linear_spd
from specres.results import COND_TRUST_REGION, SolverStatus
from specres.solver import solve

from .conftest import make_problem


# ---------------------------------------------------------------------------
# Dogleg
# ---------------------------------------------------------------------------


def test_dogleg_full_step() -> None:
    """The Gauss-Newton step is taken when it fits."""
    step = dogleg_step(np.eye(2), np.array([3.0, 4.0]), 10.0)
    np.testing.assert_allclose(step, [-3.0, -4.0])


def test_dogleg_clipped_cauchy() -> None:
    """A small radius clips the steepest-descent step."""
    step = dogleg_step(np.eye(2), np.array([3.0, 4.0]), 1.0)
    np.testing.assert_allclose(step, [-0.6, -0.8])


def test_dogleg_on_boundary() -> None:
    """Between the Cauchy point and the Gauss-Newton step the dogleg hits the radius."""
    jac = np.diag([1.0, 10.0])
    f = np.array([1.0, 1.0])
    step = dogleg_step(jac, f, 0.5)
    assert np.linalg.norm(step) == pytest.approx(0.5)
    model = f + jac @ step
    assert np.linalg.norm(model) < np.linalg.norm(f)


def test_dogleg_singular_model() -> None:
    """A singular Jacobian falls back to the Cauchy step."""
    step = dogleg_step(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([1.0, 1.0]), 10.0)
    np.testing.assert_allclose(step, [-1.0, 0.0])


def test_dogleg_stationary() -> None:
    """Zero gradient gives a zero step."""
    step = dogleg_step(np.zeros((2, 2)), np.array([1.0, 1.0]), 1.0)
    np.testing.assert_array_equal(step, [0.0, 0.0])


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("cond", [1e1, 1e3])
def test_newton_spd_in_few_iterations(cond: float) -> None:
    """SPD linear systems converge in at most three iterations."""
    report = solve_newton_tr(linear_spd(10, cond))
    assert report.converged
    assert report.iterations <= 3
    assert report.solver == SOLVER_NEWTON
    assert report.jac_evals == report.iterations
    assert all(record.condition == COND_TRUST_REGION for record in report.trace)


def test_newton_iteration_cost_grows_with_dimension() -> None:
    """Each iteration pays n evaluations for the FD Jacobian plus its trials."""
    problem = linear_spd(20, 1e1)
    newton = solve_newton_tr(problem)
    assert newton.converged
    per_iteration = (newton.f_evals - 1) / newton.iterations
    assert per_iteration >= problem.dimension + 1

    srand = solve(problem)
    assert srand.converged
    assert per_iteration >= 5 * (srand.f_evals - 1) / srand.iterations


def test_newton_small_contact_problems() -> None:
    """Every contact instance with at most 50 unknowns converges."""
    problems = [p for p in contact_suite() if p.dimension <= 50]
    assert len(problems) == 18
    for problem in problems:
        report = solve_newton_tr(problem)
        assert report.converged, report.summary()


def test_newton_iteration_limit() -> None:
    """max_iters bounds the outer loop."""
    problem = make_problem(lambda x: np.exp(x) - 2.0, [5.0])
    report = solve_newton_tr(problem, TrustRegionConfig(max_iters=1))
    assert report.status is SolverStatus.FAIL_ITER
    assert report.iterations == 1


def test_newton_stationary_point() -> None:
    """A residual with a nonzero minimum norm ends in stagnation."""
    problem = make_problem(lambda x: x**2 + 1.0, [0.0])
    report = solve_newton_tr(problem)
    assert report.status is SolverStatus.FAIL_STAGNATION
    assert not report.converged
