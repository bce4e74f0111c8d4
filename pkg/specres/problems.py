"""Library of test systems and the standard benchmark suite."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from scipy import linalg

from .const import REGIMES
from .contact import as_nonlinear_problem, build_contact_problem, load_contact_problem
from .problem import Matrix, NonlinearProblem, SpecresError, Vector

_LOGGER = logging.getLogger(__name__)

SPD_CONDITIONS = (1e1, 1e3, 1e6)
LINEAR_SIZE = 50
NONLINEAR_SIZE = 100
CONTACT_ELEMENTS = (8, 25, 100)
CONTACT_SEEDS = (1, 2, 3)


class UnknownProblemError(SpecresError):
    """A problem URI could not be resolved."""


# ---------------------------------------------------------------------------
# Linear systems
# ---------------------------------------------------------------------------


def linear_problem(
    matrix: Matrix,
    rhs: Vector,
    label: str,
    initial_point: Vector | None = None,
    solution: Vector | None = None,
) -> NonlinearProblem:
    """F(x) = A x - b."""
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    n = b.size
    return NonlinearProblem(
        label=label,
        dimension=n,
        residual=lambda x: a @ x - b,
        initial_point=np.zeros(n) if initial_point is None else initial_point,
        jacobian=lambda _x: a,
        solution=solution,
    )


def _planted_solution(n: int) -> Vector:
    return np.full(n, 0.5 / np.sqrt(n))


def _orthogonal(n: int, rng: np.random.Generator) -> Matrix:
    q, r = linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _skew(n: int, rng: np.random.Generator, scale: float) -> Matrix:
    m = rng.standard_normal((n, n))
    return scale * 0.5 * (m - m.T)


def linear_spd(n: int, cond: float) -> NonlinearProblem:
    """Diagonal SPD system with log-spaced spectrum in [1, cond]."""
    a = np.diag(np.logspace(0.0, np.log10(cond), n))
    x_star = _planted_solution(n)
    return linear_problem(a, a @ x_star, f"linear:spd:{n}:{cond:g}", solution=x_star)


def linear_nonsym(n: int, seed: int = 0) -> NonlinearProblem:
    """Nonsymmetric system whose symmetric part is positive definite."""
    rng = np.random.default_rng(seed)
    q = _orthogonal(n, rng)
    sym = q @ np.diag(np.linspace(1.0, 10.0, n)) @ q.T
    a = sym + _skew(n, rng, 1.0)
    x_star = _planted_solution(n)
    return linear_problem(a, a @ x_star, f"linear:nonsym:{n}", solution=x_star)


def linear_indef(n: int, seed: int = 0) -> NonlinearProblem:
    """Nonsymmetric system whose symmetric part is indefinite."""
    rng = np.random.default_rng(seed)
    q = _orthogonal(n, rng)
    spectrum = np.linspace(1.0, 10.0, n)
    spectrum[: max(1, n // 10)] *= -1.0
    sym = q @ np.diag(spectrum) @ q.T
    a = sym + _skew(n, rng, 0.5)
    x_star = _planted_solution(n)
    return linear_problem(a, a @ x_star, f"linear:indef:{n}", solution=x_star)


# ---------------------------------------------------------------------------
# Classic nonlinear systems
# ---------------------------------------------------------------------------


def exponential(n: int) -> NonlinearProblem:
    """
    F_1 = exp(x_1) - 1, F_i = (i / 10) (exp(x_i) + x_{i-1} - 1).

    Root at the origin.
    """
    weights = np.arange(1, n + 1) / 10.0
    weights[0] = 1.0

    def residual(x: Vector) -> Vector:
        shifted = np.concatenate(([0.0], x[:-1]))
        return weights * (np.exp(x) + shifted - 1.0)

    def jacobian(x: Vector) -> Matrix:
        jac = np.diag(weights * np.exp(x))
        jac[np.arange(1, n), np.arange(n - 1)] = weights[1:]
        return jac

    return NonlinearProblem(
        label=f"exponential:{n}",
        dimension=n,
        residual=residual,
        initial_point=np.full(n, 1.0 / n**2),
        jacobian=jacobian,
        solution=np.zeros(n),
    )


def trigonometric(n: int) -> NonlinearProblem:
    """
    F_i = 2 (n + i (1 - cos x_i) - sin x_i - sum_j cos x_j) (2 sin x_i - cos x_i).

    Root at the origin.
    """
    index = np.arange(1, n + 1, dtype=float)

    def _parts(x: Vector) -> tuple[Vector, Vector]:
        outer = n + index * (1.0 - np.cos(x)) - np.sin(x) - np.sum(np.cos(x))
        inner = 2.0 * np.sin(x) - np.cos(x)
        return outer, inner

    def residual(x: Vector) -> Vector:
        outer, inner = _parts(x)
        return 2.0 * outer * inner

    def jacobian(x: Vector) -> Matrix:
        outer, inner = _parts(x)
        d_outer = np.tile(np.sin(x), (n, 1))
        d_outer[np.diag_indices(n)] += index * np.sin(x) - np.cos(x)
        jac = 2.0 * inner[:, None] * d_outer
        jac[np.diag_indices(n)] += 2.0 * outer * (2.0 * np.cos(x) + np.sin(x))
        return jac

    return NonlinearProblem(
        label=f"trigonometric:{n}",
        dimension=n,
        residual=residual,
        initial_point=np.full(n, 101.0 / (100.0 * n)),
        jacobian=jacobian,
        solution=np.zeros(n),
    )


def broyden_tridiagonal(n: int) -> NonlinearProblem:
    """F_i = (3 - 2 x_i) x_i - x_{i-1} - 2 x_{i+1} + 1 with x_0 = x_{n+1} = 0."""

    def residual(x: Vector) -> Vector:
        left = np.concatenate(([0.0], x[:-1]))
        right = np.concatenate((x[1:], [0.0]))
        return (3.0 - 2.0 * x) * x - left - 2.0 * right + 1.0

    def jacobian(x: Vector) -> Matrix:
        jac = np.diag(3.0 - 4.0 * x)
        jac[np.arange(1, n), np.arange(n - 1)] = -1.0
        jac[np.arange(n - 1), np.arange(1, n)] = -2.0
        return jac

    return NonlinearProblem(
        label=f"broyden:{n}",
        dimension=n,
        residual=residual,
        initial_point=-np.ones(n),
        jacobian=jacobian,
    )


def symmetric_quadratic(
    matrix: Matrix, curvature: Vector, solution: Vector, label: str = "quadratic"
) -> NonlinearProblem:
    """
    F(x) = A x + c * x^2 / 2 - b with symmetric A.

    The Jacobian A + diag(c * x) is symmetric and affine in x, so two
    quadrature nodes integrate it exactly along any segment.
    """
    a = np.asarray(matrix, dtype=float)
    c = np.asarray(curvature, dtype=float)
    b = a @ solution + 0.5 * c * solution**2
    n = b.size
    return NonlinearProblem(
        label=label,
        dimension=n,
        residual=lambda x: a @ x + 0.5 * c * x**2 - b,
        initial_point=np.zeros(n),
        jacobian=lambda x: a + np.diag(c * x),
        solution=np.asarray(solution, dtype=float),
    )


# ---------------------------------------------------------------------------
# Suites and URIs
# ---------------------------------------------------------------------------


def contact_suite() -> list[NonlinearProblem]:
    """Contact problems: 3 sizes x 3 regimes x 3 seeds."""
    return [
        as_nonlinear_problem(build_contact_problem(elements, regime, seed))
        for elements in CONTACT_ELEMENTS
        for regime in REGIMES
        for seed in CONTACT_SEEDS
    ]


def analytic_suite() -> list[NonlinearProblem]:
    """Linear and classic nonlinear systems with analytic Jacobians."""
    problems = [linear_spd(LINEAR_SIZE, cond) for cond in SPD_CONDITIONS]
    problems.extend(
        [
            linear_nonsym(LINEAR_SIZE),
            linear_indef(LINEAR_SIZE),
            exponential(NONLINEAR_SIZE),
            trigonometric(NONLINEAR_SIZE),
            broyden_tridiagonal(NONLINEAR_SIZE),
        ]
    )
    return problems


def standard_suite() -> list[NonlinearProblem]:
    """The 35-problem benchmark suite: 8 analytic systems and 27 contact problems."""
    return analytic_suite() + contact_suite()


def _int(value: str, uri: str) -> int:
    try:
        return int(value)
    except ValueError as err:
        msg = f"Problem {uri!r}: {value!r} is not an integer"
        raise UnknownProblemError(msg) from err


def problem_from_uri(uri: str) -> NonlinearProblem:  # noqa: PLR0911
    """
    Resolve a builtin problem URI or a path to a serialized contact problem.

    Builtins: ``linear:spd:<n>:<cond>``, ``linear:nonsym:<n>``,
    ``linear:indef:<n>``, ``exponential:<n>``, ``trigonometric:<n>``,
    ``broyden:<n>`` and ``contact:<elements>:<regime>:<seed>``.
    """
    parts = uri.split(":")
    head = parts[0]
    try:
        if head == "linear" and len(parts) == 4 and parts[1] == "spd":
            return linear_spd(_int(parts[2], uri), float(parts[3]))
        if head == "linear" and len(parts) == 3 and parts[1] == "nonsym":
            return linear_nonsym(_int(parts[2], uri))
        if head == "linear" and len(parts) == 3 and parts[1] == "indef":
            return linear_indef(_int(parts[2], uri))
        if head == "exponential" and len(parts) == 2:
            return exponential(_int(parts[1], uri))
        if head == "trigonometric" and len(parts) == 2:
            return trigonometric(_int(parts[1], uri))
        if head == "broyden" and len(parts) == 2:
            return broyden_tridiagonal(_int(parts[1], uri))
        if head == "contact" and len(parts) == 4:
            problem = build_contact_problem(
                _int(parts[1], uri), parts[2], _int(parts[3], uri)
            )
            return as_nonlinear_problem(problem)
    except ValueError as err:
        msg = f"Problem {uri!r}: {err}"
        raise UnknownProblemError(msg) from err

    path = Path(uri)
    if path.is_file():
        return as_nonlinear_problem(load_contact_problem(path))
    msg = f"Unknown problem {uri!r}"
    raise UnknownProblemError(msg)
