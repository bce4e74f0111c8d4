"""
Nonlinear system abstraction shared by every solver and checker.

A :class:`NonlinearProblem` bundles the residual map ``F: R^n -> R^n``, an
optional analytic Jacobian and the starting point.  All evaluations go
through :func:`evaluate` / :func:`evaluate_jacobian` so that each run can
count them in its own :class:`EvalCounter`.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

_LOGGER = logging.getLogger(__name__)

Vector = NDArray[np.float64]
Matrix = NDArray[np.float64]
ResidualFn = Callable[[Vector], Vector]
JacobianFn = Callable[[Vector], Matrix]

# Relative forward-difference step
_FD_REL_STEP = 1e-7


class SpecresError(Exception):
    """Base error for the specres library."""


class EvaluationError(SpecresError):
    """Residual or Jacobian produced a non-finite component."""

    def __init__(self, msg: str, index: int) -> None:
        super().__init__(msg)
        self.index = index


class CapabilityError(SpecresError):
    """Problem lacks a capability the caller needs (e.g. a Jacobian)."""


@dataclass(frozen=True)
class NonlinearProblem:
    """A square nonlinear system F(x) = 0."""

    label: str
    dimension: int
    residual: ResidualFn
    initial_point: Vector
    jacobian: JacobianFn | None = None
    solution: Vector | None = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            msg = f"Problem {self.label}: dimension must be positive"
            raise ValueError(msg)
        if np.shape(self.initial_point) != (self.dimension,):
            msg = (
                f"Problem {self.label}: initial point has shape "
                f"{np.shape(self.initial_point)}, expected ({self.dimension},)"
            )
            raise ValueError(msg)

    @property
    def has_jacobian(self) -> bool:
        """Return True if an analytic Jacobian is attached."""
        return self.jacobian is not None


@dataclass
class EvalCounter:
    """Per-run evaluation counters."""

    f_evals: int = 0
    jac_evals: int = 0


def _first_non_finite(values: NDArray[np.float64]) -> int:
    bad = np.flatnonzero(~np.isfinite(values))
    return int(bad[0])


def evaluate(problem: NonlinearProblem, x: Vector, counter: EvalCounter) -> Vector:
    """
    Evaluate F(x) and count the call.

    Raises EvaluationError carrying the first offending index when any
    component is NaN or infinite.
    """
    if np.shape(x) != (problem.dimension,):
        msg = f"Point has shape {np.shape(x)}, expected ({problem.dimension},)"
        raise ValueError(msg)
    counter.f_evals += 1
    values = np.asarray(problem.residual(x), dtype=np.float64)
    if values.shape != (problem.dimension,):
        msg = (
            f"Residual of {problem.label} returned shape {values.shape}, "
            f"expected ({problem.dimension},)"
        )
        raise ValueError(msg)
    if not np.all(np.isfinite(values)):
        index = _first_non_finite(values)
        msg = f"Non-finite residual component {index} in {problem.label}"
        raise EvaluationError(msg, index)
    return values


def evaluate_jacobian(
    problem: NonlinearProblem, x: Vector, counter: EvalCounter | None = None
) -> Matrix:
    """Evaluate the analytic Jacobian J(x)."""
    if problem.jacobian is None:
        msg = f"Problem {problem.label} has no analytic Jacobian"
        raise CapabilityError(msg)
    if counter is not None:
        counter.jac_evals += 1
    jac = np.asarray(problem.jacobian(x), dtype=np.float64)
    n = problem.dimension
    if jac.shape != (n, n):
        msg = f"Jacobian of {problem.label} returned shape {jac.shape}"
        raise ValueError(msg)
    if not np.all(np.isfinite(jac)):
        index = _first_non_finite(jac.ravel())
        msg = f"Non-finite Jacobian entry {index} in {problem.label}"
        raise EvaluationError(msg, index)
    return jac


def default_fd_step(x: Vector) -> float:
    """Return the forward-difference step 1e-7 * (1 + ||x||_inf)."""
    return _FD_REL_STEP * (1.0 + float(np.max(np.abs(x), initial=0.0)))


def fd_jacobian(
    problem: NonlinearProblem,
    x: Vector,
    h: float | None = None,
    counter: EvalCounter | None = None,
    f0: Vector | None = None,
) -> Matrix:
    """
    Approximate J(x) by forward differences.

    Column i is (F(x + h e_i) - F(x)) / h.  Consumes n + 1 residual
    evaluations, or n when the caller already holds ``f0 = F(x)``.
    """
    step = default_fd_step(x) if h is None else h
    if step <= 0:
        msg = f"Finite-difference step must be positive, got {step}"
        raise ValueError(msg)
    own = EvalCounter() if counter is None else counter
    x = np.asarray(x, dtype=np.float64)
    base = evaluate(problem, x, own) if f0 is None else f0
    n = problem.dimension
    _LOGGER.debug("FD Jacobian of %s with step %.3g", problem.label, step)
    jac = np.empty((n, n))
    for i in range(n):
        shifted = x.copy()
        shifted[i] += step
        jac[:, i] = (evaluate(problem, shifted, own) - base) / step
    return jac


def counting(problem: NonlinearProblem) -> tuple[NonlinearProblem, list[Vector]]:
    """
    Wrap a problem so every residual invocation is recorded.

    Returns the wrapped problem and the list the calls are appended to.
    Used as an independent oracle for evaluation accounting.
    """
    calls: list[Vector] = []
    inner = problem.residual

    def _traced(x: Vector) -> Vector:
        calls.append(np.array(x, copy=True))
        return inner(x)

    wrapped = NonlinearProblem(
        label=problem.label,
        dimension=problem.dimension,
        residual=_traced,
        initial_point=problem.initial_point,
        jacobian=problem.jacobian,
        solution=problem.solution,
    )
    return wrapped, calls
