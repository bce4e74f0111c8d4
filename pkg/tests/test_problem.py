"""Tests for the nonlinear problem abstraction."""

from __future__ import annotations

import math

import numpy as np
import pytest

from specres.problem import (
    CapabilityError,
    EvalCounter,
    EvaluationError,
    NonlinearProblem,
    counting,
    default_fd_step,
    evaluate,
    evaluate_jacobian,
    fd_jacobian,
)
from specres.solver import solve

from .conftest import make_linear, make_problem


# ---------------------------------------------------------------------------
# NonlinearProblem
# ---------------------------------------------------------------------------


def test_problem_rejects_bad_initial_point() -> None:
    """Initial point must have length n."""
    with pytest.raises(ValueError, match="initial point"):
        NonlinearProblem("bad", 2, lambda x: x, np.zeros(3))


def test_problem_rejects_zero_dimension() -> None:
    """Dimension must be positive."""
    with pytest.raises(ValueError, match="dimension"):
        NonlinearProblem("bad", 0, lambda x: x, np.zeros(0))


def test_has_jacobian() -> None:
    """Linear problems carry their matrix as Jacobian."""
    assert make_linear(np.eye(2)).has_jacobian
    assert not make_problem(lambda x: x, [0.0, 0.0]).has_jacobian


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def test_evaluate_identity() -> None:
    """F(x) = x returns x and counts one evaluation."""
    counter = EvalCounter()
    problem = make_problem(lambda x: x, [0.0, 0.0])
    result = evaluate(problem, np.array([1.0, 2.0]), counter)
    np.testing.assert_array_equal(result, [1.0, 2.0])
    assert counter.f_evals == 1


def test_evaluate_linear() -> None:
    """diag(1, 3) (1, 1) = (1, 3)."""
    counter = EvalCounter()
    problem = make_linear([[1.0, 0.0], [0.0, 3.0]])
    result = evaluate(problem, np.array([1.0, 1.0]), counter)
    np.testing.assert_array_equal(result, [1.0, 3.0])


def test_evaluate_nan_carries_index() -> None:
    """A NaN component raises EvaluationError with its index."""
    counter = EvalCounter()
    problem = make_problem(lambda x: np.array([1.0, math.nan, math.inf]), [0, 0, 0])
    with pytest.raises(EvaluationError) as err:
        evaluate(problem, np.zeros(3), counter)
    assert err.value.index == 1
    assert counter.f_evals == 1


def test_evaluate_rejects_wrong_shape() -> None:
    """Points of the wrong length are a contract violation."""
    problem = make_problem(lambda x: x, [0.0, 0.0])
    with pytest.raises(ValueError, match="shape"):
        evaluate(problem, np.zeros(3), EvalCounter())


def test_evaluate_rejects_wrong_output_shape() -> None:
    """Residuals must return n components."""
    problem = make_problem(lambda x: np.zeros(3), [0.0, 0.0])
    with pytest.raises(ValueError, match="returned shape"):
        evaluate(problem, np.zeros(2), EvalCounter())


def test_evaluate_jacobian_missing() -> None:
    """Problems without Jacobian raise CapabilityError."""
    problem = make_problem(lambda x: x, [0.0])
    with pytest.raises(CapabilityError):
        evaluate_jacobian(problem, np.zeros(1))


def test_evaluate_jacobian_counts() -> None:
    """Jacobian evaluations are counted separately."""
    counter = EvalCounter()
    problem = make_linear([[2.0, 1.0], [0.0, 3.0]])
    jac = evaluate_jacobian(problem, np.zeros(2), counter)
    np.testing.assert_array_equal(jac, [[2.0, 1.0], [0.0, 3.0]])
    assert counter.jac_evals == 1
    assert counter.f_evals == 0


# ---------------------------------------------------------------------------
# fd_jacobian
# ---------------------------------------------------------------------------


def test_fd_jacobian_linear_reproduces_matrix(rng: np.random.Generator) -> None:
    """Forward differences of A x reproduce A."""
    a = rng.standard_normal((4, 4))
    problem = make_linear(a)
    jac = fd_jacobian(problem, np.zeros(4), h=1e-7)
    tol = 1e-8 * (1.0 + np.max(np.sum(np.abs(a), axis=1)))
    np.testing.assert_allclose(jac, a, atol=tol, rtol=0)


def test_fd_jacobian_linear_nonzero_point(rng: np.random.Generator) -> None:
    """A x at an arbitrary point, h = 1e-6."""
    a = rng.standard_normal((3, 3))
    problem = make_linear(a)
    jac = fd_jacobian(problem, rng.standard_normal(3), h=1e-6)
    np.testing.assert_allclose(jac, a, atol=1e-6 * np.max(np.abs(a)) + 1e-8)


def test_fd_jacobian_quadratic() -> None:
    """(x1^2, x2) at (1, 1) gives [[2 + h, 0], [0, 1]]."""
    h = 1e-6
    problem = make_problem(lambda x: np.array([x[0] ** 2, x[1]]), [1.0, 1.0])
    jac = fd_jacobian(problem, np.array([1.0, 1.0]), h=h)
    np.testing.assert_allclose(jac, [[2.0 + h, 0.0], [0.0, 1.0]], atol=1e-5)


def test_fd_jacobian_sine() -> None:
    """d/dx sin at 0 is 1."""
    problem = make_problem(np.sin, [0.0])
    jac = fd_jacobian(problem, np.zeros(1))
    assert jac[0, 0] == pytest.approx(1.0, abs=1e-6)


def test_fd_jacobian_evaluation_count() -> None:
    """n + 1 evaluations, or n with a precomputed F(x)."""
    problem = make_linear(np.eye(3))
    counter = EvalCounter()
    fd_jacobian(problem, np.ones(3), counter=counter)
    assert counter.f_evals == 4

    counter = EvalCounter()
    f0 = evaluate(problem, np.ones(3), EvalCounter())
    fd_jacobian(problem, np.ones(3), counter=counter, f0=f0)
    assert counter.f_evals == 3


def test_fd_jacobian_rejects_nonpositive_step() -> None:
    """h must be positive."""
    with pytest.raises(ValueError, match="positive"):
        fd_jacobian(make_linear(np.eye(2)), np.zeros(2), h=0.0)


def test_fd_jacobian_matches_analytic_on_nonlinear() -> None:
    """Analytic and FD Jacobians agree to 1e-5 with h = 1e-6."""
    problem = NonlinearProblem(
        label="cubic",
        dimension=2,
        residual=lambda x: np.array([x[0] ** 3 + x[1], np.sin(x[0]) * x[1]]),
        initial_point=np.zeros(2),
        jacobian=lambda x: np.array(
            [[3 * x[0] ** 2, 1.0], [np.cos(x[0]) * x[1], np.sin(x[0])]]
        ),
    )
    x = np.array([0.7, -1.3])
    np.testing.assert_allclose(
        fd_jacobian(problem, x, h=1e-6), evaluate_jacobian(problem, x), atol=1e-5
    )


def test_default_fd_step() -> None:
    """Step scales with the largest component."""
    assert default_fd_step(np.zeros(2)) == pytest.approx(1e-7)
    assert default_fd_step(np.array([-9.0, 3.0])) == pytest.approx(1e-6)


# ---------------------------------------------------------------------------
# Counting oracle
# ---------------------------------------------------------------------------


def test_counter_matches_tracing_wrapper(diag_problem: NonlinearProblem) -> None:
    """The solver's count equals the number of recorded residual calls."""
    wrapped, calls = counting(diag_problem)
    report = solve(wrapped)
    assert report.converged
    assert report.f_evals == len(calls)
