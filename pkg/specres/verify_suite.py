"""Randomized instance suites driving the spectral checks."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.stats import ortho_group

from .const import (
    DEFAULT_INSTANCES,
    SUITE_ALL,
    SUITE_LEMMA1,
    SUITE_LEMMA2,
    SUITE_LEMMA3,
    SUITE_THEOREM1,
    VERIFY_SUITES,
)
from .problem import EvalCounter, Matrix, Vector, evaluate
from .problems import linear_problem, symmetric_quadratic
from .spectral import (
    CASE_INDEFINITE,
    CASE_ND,
    CASE_PD,
    CASE_SPD,
    REL_EQUAL,
    REL_LT,
    AverageMatrices,
    InequalityCheck,
    VerificationReport,
    average_jacobian,
    check_lemma1,
    check_lemma2_bounds,
    check_lemma3_recurrence,
    check_steplength_pair,
    step_norm_ratio,
    theorem1_intervals,
)

_LOGGER = logging.getLogger(__name__)

_MIN_DIM = 2
_MAX_DIM = 10
_EIG_LOW = 0.1
_EIG_HIGH = 10.0
_SAMPLES = 50
# Samples keep this fraction of the interval width away from its endpoints
_MARGIN = 0.01
# Intervals narrower than this on the 1/sqrt(q(G'G,F)) scale are not sampled
_MIN_WIDTH = 1e-3

_LEMMA2_CASES = (CASE_SPD, CASE_PD, CASE_INDEFINITE, CASE_ND)
_SUITE_ORDER = (SUITE_LEMMA1, SUITE_LEMMA2, SUITE_LEMMA3, SUITE_THEOREM1)


@dataclass
class SuiteReport:
    """Outcome of a randomized verification suite."""

    suite: str
    instances: int = 0
    checks: int = 0
    skipped: int = 0
    violations: list[str] = field(default_factory=list)
    parts: list[SuiteReport] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        """Return True if no check was violated."""
        return not self.violations

    def absorb(self, report: VerificationReport, instance: int) -> None:
        """Count the checks of one instance and keep its violations."""
        self.checks += len(report.checks)
        self.violations.extend(
            f"[{self.suite} #{instance} case {report.case}] {check.format_line()}"
            for check in report.violations
        )

    def merge(self, part: SuiteReport) -> None:
        """Fold a sub-suite into this one."""
        self.parts.append(part)
        self.instances += part.instances
        self.checks += part.checks
        self.skipped += part.skipped
        self.violations.extend(part.violations)

    def format(self) -> str:
        """Summary lines followed by every violated check."""
        lines = [
            f"{part.suite}: {part.instances} instances, {part.checks} checks, "
            f"{len(part.violations)} violations, {part.skipped} skipped, "
            f"{part.elapsed:.2f}s"
            for part in self.parts or [self]
        ]
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"{self.suite}: {verdict}")
        lines.extend(self.violations)
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Instance generators
# ---------------------------------------------------------------------------


def _dimension(rng: np.random.Generator) -> int:
    return int(rng.integers(_MIN_DIM, _MAX_DIM + 1))


def _symmetric(values: Vector, rng: np.random.Generator) -> Matrix:
    """Q diag(values) Q' for a random orthogonal Q, symmetric to the last bit."""
    q = ortho_group.rvs(dim=values.size, random_state=rng)
    m = q @ np.diag(values) @ q.T
    return 0.5 * (m + m.T)


def _skew(n: int, rng: np.random.Generator) -> Matrix:
    m = rng.standard_normal((n, n))
    return 0.5 * (m - m.T)


def _magnitudes(n: int, rng: np.random.Generator) -> Vector:
    return rng.uniform(_EIG_LOW, _EIG_HIGH, n)


def _mixed_signs(n: int, rng: np.random.Generator) -> Vector:
    signs = rng.choice([-1.0, 1.0], n)
    signs[0], signs[1] = -1.0, 1.0
    return signs


def case_matrix(case: str, n: int, rng: np.random.Generator) -> Matrix:
    """Random matrix whose average-matrix case is ``case``."""
    values = _magnitudes(n, rng)
    if case == CASE_SPD:
        return _symmetric(values, rng)
    if case == CASE_PD:
        return _symmetric(values, rng) + _skew(n, rng)
    if case == CASE_ND:
        return -(_symmetric(values, rng) + _skew(n, rng))
    if case == CASE_INDEFINITE:
        return _symmetric(values * _mixed_signs(n, rng), rng) + _skew(n, rng)
    msg = f"No generator for case {case!r}"
    raise ValueError(msg)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def _lemma1(report: SuiteReport, instance: int, rng: np.random.Generator) -> None:
    n = _dimension(rng)
    p = rng.standard_normal(n)
    y = rng.standard_normal(n)
    report.absorb(check_steplength_pair(p, y), instance)

    # Secant pair of a linear system through the quadrature average
    a = rng.standard_normal((n, n)) + n * np.eye(n) * rng.uniform(-1.0, 1.0)
    problem = linear_problem(a, rng.standard_normal(n), f"lemma1:{instance}")
    x = rng.standard_normal(n)
    p = rng.standard_normal(n)
    counter = EvalCounter()
    y = evaluate(problem, x + p, counter) - evaluate(problem, x, counter)
    nodes = int(rng.integers(1, 9))
    matrices = average_jacobian(problem, x, p, nodes)
    checked = check_lemma1(p, y, matrices)
    if checked.flags:
        report.skipped += 1
    report.absorb(checked, instance)


def _lemma2(report: SuiteReport, instance: int, rng: np.random.Generator) -> None:
    case = _LEMMA2_CASES[instance % len(_LEMMA2_CASES)]
    n = _dimension(rng)
    matrix = case_matrix(case, n, rng)
    p = rng.standard_normal(n)
    matrices = AverageMatrices.from_matrix(matrix, np.zeros(n), p)
    checked = check_lemma2_bounds(matrices, p)
    if checked.case != case:
        report.violations.append(
            f"[{report.suite} #{instance}] generated case {case}, "
            f"detected {checked.case}"
        )
    if checked.flags:
        report.skipped += 1
    report.absorb(checked, instance)


def _lemma3(report: SuiteReport, instance: int, rng: np.random.Generator) -> None:
    n = _dimension(rng)
    values = _magnitudes(n, rng) * rng.choice([-1.0, 1.0], n)
    matrix = _symmetric(values, rng)
    solution = rng.standard_normal(n)
    if instance % 2 == 0:
        problem = linear_problem(matrix, matrix @ solution, f"lemma3:{instance}")
        nodes = 1
    else:
        curvature = rng.standard_normal(n)
        problem = symmetric_quadratic(
            matrix, curvature, solution, f"lemma3:{instance}"
        )
        nodes = 2
    x_k = rng.standard_normal(n)
    if instance % 4 == 0:
        # Linear system: hit one eigenvalue so its component is annihilated
        beta_k = 1.0 / float(rng.choice(values))
    else:
        beta_k = float(rng.uniform(0.01, 1.0))
    report.absorb(check_lemma3_recurrence(problem, x_k, beta_k, nodes), instance)


def _sample_interval(  # noqa: PLR0913
    checked: VerificationReport,
    name: str,
    interval: tuple[float, float],
    ratio: Callable[[float], float],
    bound: float,
    *,
    strict: bool,
    scale: float,
    rng: np.random.Generator,
) -> bool:
    """
    Sample t inside and outside ``interval`` against ``ratio(t)`` vs ``bound``.

    Strict intervals require ``ratio < bound`` inside, closed ones
    ``ratio <= bound``; outside the relation must fail.
    """
    lo, hi = interval
    width = hi - lo
    if width * scale < _MIN_WIDTH:
        _LOGGER.debug("Skipping %s: width %.3e too narrow", name, width)
        return False
    margin = _MARGIN * width
    for t in rng.uniform(lo + margin, hi - margin, _SAMPLES):
        value = ratio(float(t))
        if strict:
            check = InequalityCheck(f"{name} t={t:.4g} inside", value, bound, REL_LT)
        else:
            check = InequalityCheck(f"{name} t={t:.4g} inside", value, bound, tol=0.0)
        checked.checks.append(check)

    beyond = rng.uniform(margin, margin + width, _SAMPLES)
    sides = rng.choice([-1.0, 1.0], _SAMPLES)
    for side, dist in zip(sides, beyond, strict=True):
        t = float(hi + dist if side > 0 else lo - dist)
        value = ratio(t)
        if strict:
            check = InequalityCheck(f"{name} t={t:.4g} outside", bound, value, tol=0.0)
        else:
            check = InequalityCheck(f"{name} t={t:.4g} outside", bound, value, REL_LT)
        checked.checks.append(check)
    return True


def _theorem1(report: SuiteReport, instance: int, rng: np.random.Generator) -> None:
    n = _dimension(rng)
    values = _magnitudes(n, rng) * rng.choice([-1.0, 1.0], n)
    matrix = _symmetric(values, rng)
    f_k = rng.standard_normal(n)
    eta = 0.0 if instance % 5 == 0 else float(rng.uniform(0.0, 1.0))
    intervals = theorem1_intervals(
        AverageMatrices.from_matrix(matrix, np.zeros(n), f_k), f_k, eta
    )
    scale = math.sqrt(intervals.q_gtg)
    bound = 1.0 + eta
    checked = VerificationReport("acceptance intervals", case=intervals.sign_case)
    complete = intervals.descent_minus is not None

    for sign, label, descent, norm_descent in (
        (-1, "minus", intervals.descent_minus, intervals.and_minus),
        (1, "plus", intervals.descent_plus, intervals.and_plus),
    ):
        ratio = partial(step_norm_ratio, matrix, f_k, sign=sign)
        if descent is not None:
            complete &= _sample_interval(
                checked,
                f"descent {label}",
                descent,
                ratio,
                1.0,
                strict=True,
                scale=scale,
                rng=rng,
            )
        complete &= _sample_interval(
            checked,
            f"norm descent {label}",
            norm_descent,
            ratio,
            bound,
            strict=False,
            scale=scale,
            rng=rng,
        )
        for end in norm_descent:
            checked.add(
                f"{label} endpoint t={end:.4g}: ratio == 1+eta",
                ratio(end),
                bound,
                REL_EQUAL,
                1e-8,
            )

    if not complete:
        report.skipped += 1
    report.absorb(checked, instance)


_SUITES: dict[str, Callable[[SuiteReport, int, np.random.Generator], None]] = {
    SUITE_LEMMA1: _lemma1,
    SUITE_LEMMA2: _lemma2,
    SUITE_LEMMA3: _lemma3,
    SUITE_THEOREM1: _theorem1,
}


def _run_single(suite: str, instances: int, seed: int) -> SuiteReport:
    rng = np.random.default_rng([seed, _SUITE_ORDER.index(suite)])
    report = SuiteReport(suite)
    generate = _SUITES[suite]
    start = time.perf_counter()
    for instance in range(instances):
        generate(report, instance, rng)
        report.instances += 1
    report.elapsed = time.perf_counter() - start
    _LOGGER.info(
        "%s: %d instances, %d checks, %d violations in %.2fs",
        suite,
        report.instances,
        report.checks,
        len(report.violations),
        report.elapsed,
    )
    return report


def run_verification_suite(
    suite: str = SUITE_ALL, instances: int = DEFAULT_INSTANCES, seed: int = 0
) -> SuiteReport:
    """
    Run a randomized verification suite.

    Each sub-suite draws from its own generator seeded by ``(seed, suite)``,
    so ``lemma2`` alone reproduces the ``lemma2`` part of ``lemmas``.
    """
    if suite not in VERIFY_SUITES:
        msg = f"Unknown suite {suite!r}, expected one of {', '.join(VERIFY_SUITES)}"
        raise ValueError(msg)
    if instances < 1:
        msg = f"Suite needs at least one instance, got {instances}"
        raise ValueError(msg)
    if seed < 0:
        msg = f"Seed must be non-negative, got {seed}"
        raise ValueError(msg)

    if suite != SUITE_ALL:
        report = SuiteReport(suite)
        report.merge(_run_single(suite, instances, seed))
        report.elapsed = report.parts[0].elapsed
        return report

    report = SuiteReport(suite)
    for name in _SUITE_ORDER:
        report.merge(_run_single(name, instances, seed))
    report.elapsed = sum(part.elapsed for part in report.parts)
    return report
