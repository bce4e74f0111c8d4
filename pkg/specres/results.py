"""Solver outcomes and iteration traces shared by every solver."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path

import numpy as np

from .problem import SpecresError, Vector

_LOGGER = logging.getLogger(__name__)

COND_LIN1 = "lin1"
COND_LIN2 = "lin2"
COND_TRUST_REGION = "tr"

SIGN_MINUS = "-"
SIGN_PLUS = "+"

TRACE_COLUMNS = ["k", "beta", "gamma", "sign", "bt", "f_norm", "cond"]


class ReportWriteError(SpecresError):
    """An artifact could not be written."""


class SolverStatus(StrEnum):
    """Terminal state of a solve."""

    CONVERGED = "converged"
    FAIL_ITER = "fail_iter"
    FAIL_FEVALS = "fail_fevals"
    FAIL_BACKTRACKS = "fail_backtracks"
    FAIL_STAGNATION = "fail_stagnation"
    CRASHED = "crashed"

    @property
    def flag(self) -> str:
        """Short failure flag used in tables ("" when converged)."""
        return STATUS_FLAGS[self]


STATUS_FLAGS: dict[SolverStatus, str] = {
    SolverStatus.CONVERGED: "",
    SolverStatus.FAIL_ITER: "it",
    SolverStatus.FAIL_FEVALS: "fmax",
    SolverStatus.FAIL_BACKTRACKS: "sigma",
    SolverStatus.FAIL_STAGNATION: "incr",
    SolverStatus.CRASHED: "crash",
}


@dataclass(frozen=True)
class IterationRecord:
    """
    One accepted iteration.

    ``f_norm`` is ||F_k|| at the start of the iteration and ``f_next`` the
    norm after the accepted step.  ``f_evals`` is the cumulative count
    once the iteration has finished.
    """

    k: int
    beta: float
    gamma: float
    sign: str
    backtracks: int
    f_norm: float
    f_next: float
    condition: str
    eta: float = 0.0
    f_evals: int = 0
    fallback: bool = False

    @property
    def step_scale(self) -> float:
        """Signed multiplier of F_k in the step, p_k = scale * F_k."""
        scale = self.gamma * self.beta
        return -scale if self.sign == SIGN_MINUS else scale

    def as_row(self) -> list[str]:
        """Render the record as a trace CSV row."""
        return [
            str(self.k),
            repr(self.beta),
            repr(self.gamma),
            self.sign,
            str(self.backtracks),
            repr(self.f_norm),
            self.condition,
        ]


@dataclass
class SolverReport:
    """Outcome of one solve."""

    status: SolverStatus
    x: Vector
    f_norm: float
    f_evals: int
    iterations: int
    trace: list[IterationRecord] = field(default_factory=list)
    solver: str = ""
    problem: str = ""
    jac_evals: int = 0
    fallbacks: int = 0
    message: str = ""

    @property
    def converged(self) -> bool:
        """Return True if the solve reached the tolerance."""
        return self.status is SolverStatus.CONVERGED

    def summary(self) -> str:
        """One-paragraph human readable summary."""
        lines = [
            f"problem:    {self.problem}",
            f"solver:     {self.solver}",
            f"status:     {self.status.value}"
            + (f" ({self.status.flag})" if self.status.flag else ""),
            f"iterations: {self.iterations}",
            f"f_evals:    {self.f_evals}",
            f"||F||:      {self.f_norm:.6e}",
        ]
        if self.jac_evals:
            lines.append(f"jac_evals:  {self.jac_evals}")
        if self.fallbacks:
            lines.append(f"fallbacks:  {self.fallbacks}")
        if self.message:
            lines.append(f"message:    {self.message}")
        return "\n".join(lines)

    def max_f_norm(self) -> float:
        """Largest residual norm seen along the trace."""
        norms = [self.f_norm]
        for record in self.trace:
            norms.extend((record.f_norm, record.f_next))
        return max(norms)


# ---------------------------------------------------------------------------
# Trace export
# ---------------------------------------------------------------------------


def trace_to_csv(report: SolverReport) -> str:
    """Return the iteration trace as CSV text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for record in report.trace:
        writer.writerow(record.as_row())
    return buffer.getvalue()


def write_trace_csv(report: SolverReport, path: Path) -> Path:
    """Write the iteration trace to ``path``."""
    try:
        path.write_text(trace_to_csv(report), encoding="utf-8")
    except OSError as err:
        msg = f"Cannot write trace to {path}: {err}"
        raise ReportWriteError(msg) from err
    _LOGGER.debug("Wrote %d trace rows to %s", len(report.trace), path)
    return path


def residual_norm(values: Vector) -> float:
    """Euclidean norm of a residual vector."""
    return float(np.linalg.norm(values))
