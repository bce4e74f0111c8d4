"""
Finite-difference Newton trust-region baseline.

Minimizes ``m(x) = ||F(x)||^2 / 2`` with dogleg steps on the Gauss-Newton
model ``||F + J s||``.  The Jacobian is rebuilt by forward differences once
per outer iteration, so every iteration costs ``n`` extra residual
evaluations; rejected trial steps reuse it.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import linalg

from .config import TrustRegionConfig
from .const import SOLVER_NEWTON
from .problem import (
    EvalCounter,
    Matrix,
    NonlinearProblem,
    Vector,
    evaluate,
    fd_jacobian,
)
from .results import (
    COND_TRUST_REGION,
    SIGN_PLUS,
    IterationRecord,
    SolverReport,
    SolverStatus,
    residual_norm,
)

_LOGGER = logging.getLogger(__name__)

# Relative pivot size below which R counts as singular
_SINGULAR_PIVOT = 1e-14
# Radius floor relative to 1 + ||x||
_RADIUS_FLOOR = 1e-14


def _cauchy_step(jac: Matrix, grad: Vector, radius: float) -> Vector:
    """Minimizer of the model along -grad, clipped to the radius."""
    jg = jac @ grad
    denom = float(jg @ jg)
    gnorm = float(np.linalg.norm(grad))
    if denom == 0.0:
        return -radius * grad / gnorm
    step = -(gnorm**2 / denom) * grad
    length = float(np.linalg.norm(step))
    if length > radius:
        step *= radius / length
    return step


def _gauss_newton_step(jac: Matrix, f: Vector) -> Vector | None:
    """Solve J s = -F by dense QR, or None when R is numerically singular."""
    q, r = linalg.qr(jac)
    pivots = np.abs(np.diag(r))
    if pivots.min() <= _SINGULAR_PIVOT * max(pivots.max(), 1.0):
        return None
    return linalg.solve_triangular(r, -(q.T @ f))


def dogleg_step(jac: Matrix, f: Vector, radius: float) -> Vector:
    """
    Dogleg minimizer of ||F + J s|| subject to ||s|| <= radius.

    Takes the Gauss-Newton step when it fits, otherwise walks from the
    Cauchy point towards it up to the boundary.  A singular model falls back
    to the clipped Cauchy step.
    """
    grad = jac.T @ f
    if not np.any(grad):
        return np.zeros_like(f)

    gn = _gauss_newton_step(jac, f)
    if gn is None:
        _LOGGER.debug("Singular Gauss-Newton model, taking the Cauchy step")
        return _cauchy_step(jac, grad, radius)
    if float(np.linalg.norm(gn)) <= radius:
        return gn

    cauchy = _cauchy_step(jac, grad, radius)
    if float(np.linalg.norm(cauchy)) >= radius * (1.0 - 1e-12):
        return cauchy

    # ||cauchy + tau (gn - cauchy)|| = radius for tau in [0, 1]
    leg = gn - cauchy
    a = float(leg @ leg)
    b = 2.0 * float(cauchy @ leg)
    c = float(cauchy @ cauchy) - radius**2
    tau = (-b + math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
    return cauchy + tau * leg


def solve_newton_tr(
    problem: NonlinearProblem, config: TrustRegionConfig | None = None
) -> SolverReport:
    """Solve F(x) = 0 with the finite-difference Newton trust-region method."""
    cfg = config or TrustRegionConfig()
    counter = EvalCounter()
    x = problem.initial_point.astype(float, copy=True)
    f_vec = evaluate(problem, x, counter)
    f_norm = residual_norm(f_vec)
    radius = cfg.initial_radius
    trace: list[IterationRecord] = []

    def finish(status: SolverStatus, message: str = "") -> SolverReport:
        report = SolverReport(
            status=status,
            x=x,
            f_norm=f_norm,
            f_evals=counter.f_evals,
            iterations=len(trace),
            trace=trace,
            solver=SOLVER_NEWTON,
            problem=problem.label,
            jac_evals=counter.jac_evals,
            message=message,
        )
        _LOGGER.info(
            "%s on %s: %s after %d iterations, %d F-evaluations, ||F||=%.3e",
            SOLVER_NEWTON,
            problem.label,
            status.value,
            report.iterations,
            report.f_evals,
            f_norm,
        )
        return report

    while f_norm > cfg.tol:
        if len(trace) >= cfg.max_iters:
            return finish(SolverStatus.FAIL_ITER, f"Iteration limit {cfg.max_iters}")

        jac = fd_jacobian(problem, x, cfg.fd_step, counter, f0=f_vec)
        counter.jac_evals += 1
        rejected = 0
        while True:
            floor = _RADIUS_FLOOR * (1.0 + float(np.linalg.norm(x)))
            if radius < floor:
                return finish(SolverStatus.FAIL_STAGNATION, "Trust region collapsed")
            step = dogleg_step(jac, f_vec, radius)
            length = float(np.linalg.norm(step))
            if length < floor:
                return finish(SolverStatus.FAIL_STAGNATION, "Stationary model")

            model = f_vec + jac @ step
            predicted = 0.5 * (f_norm**2 - float(model @ model))
            x_trial = x + step
            f_trial = evaluate(problem, x_trial, counter)
            trial_norm = residual_norm(f_trial)
            actual = 0.5 * (f_norm**2 - trial_norm**2)
            ratio = actual / predicted if predicted > 0.0 else -math.inf

            radius_used = radius
            if ratio < cfg.shrink_threshold:
                radius = cfg.shrink_factor * length
            elif ratio > cfg.expand_threshold and length >= 0.99 * radius:
                radius = min(cfg.expand_factor * radius, cfg.max_radius)
            if ratio > cfg.accept_ratio:
                break
            rejected += 1

        trace.append(
            IterationRecord(
                k=len(trace),
                beta=radius_used,
                gamma=length / radius_used,
                sign=SIGN_PLUS,
                backtracks=rejected,
                f_norm=f_norm,
                f_next=trial_norm,
                condition=COND_TRUST_REGION,
                f_evals=counter.f_evals,
            )
        )
        x, f_vec, f_norm = x_trial, f_trial, trial_norm

    return finish(SolverStatus.CONVERGED)
