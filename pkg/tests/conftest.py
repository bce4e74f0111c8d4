"""Fixtures for specres tests."""

from __future__ import annotations

import numpy as np
import pytest

from specres.problem import NonlinearProblem, Vector
from specres.problems import linear_problem


def make_linear(
    matrix: list[list[float]] | np.ndarray,
    x0: list[float] | Vector | None = None,
    rhs: list[float] | Vector | None = None,
    label: str = "linear",
) -> NonlinearProblem:
    """F(x) = A x - b with b = 0 by default."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    b = np.zeros(n) if rhs is None else np.asarray(rhs, dtype=float)
    start = None if x0 is None else np.asarray(x0, dtype=float)
    return linear_problem(a, b, label, initial_point=start)


def make_problem(
    residual: object,
    x0: list[float],
    label: str = "custom",
) -> NonlinearProblem:
    """Problem from a bare residual callable."""
    start = np.asarray(x0, dtype=float)
    return NonlinearProblem(
        label=label,
        dimension=start.size,
        residual=residual,  # type: ignore[arg-type]
        initial_point=start,
    )


@pytest.fixture
def shifted_identity() -> NonlinearProblem:
    """F(x) = x - c with c = (1, 2, 3) from the origin."""
    c = np.array([1.0, 2.0, 3.0])
    return make_linear(np.eye(3), x0=[0.0, 0.0, 0.0], rhs=c, label="shifted")


@pytest.fixture
def diag_problem() -> NonlinearProblem:
    """F(x) = diag(1, 10) x from (1, 1)."""
    return make_linear([[1.0, 0.0], [0.0, 10.0]], x0=[1.0, 1.0], label="diag")


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(1234)
