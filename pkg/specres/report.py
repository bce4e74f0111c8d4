"""CSV, SVG and text artifacts for benchmark grids and single solves."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib as mpl
from matplotlib.figure import Figure

from .bench import ProfileTable, RunResult, performance_profile, solved_summary
from .const import FORMAT_CSV, FORMAT_SVG, FORMAT_TEXT, REPORT_FORMATS
from .results import ReportWriteError, SolverReport

_LOGGER = logging.getLogger(__name__)

CSV_COLUMNS = ["solver", "problem", "status", "f_evals", "wall_ms", "final_fnorm"]

# Fixed SVG ids and no timestamp, so identical data gives identical files
_SVG_RC = {"svg.hashsalt": "specres", "svg.fonttype": "path"}
_SVG_METADATA = {"Date": None}


def _write_text(path: Path, text: str, what: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as err:
        msg = f"Cannot write {what} to {path}: {err}"
        raise ReportWriteError(msg) from err
    _LOGGER.debug("Wrote %s to %s", what, path)
    return path


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def results_to_csv(
    results: Sequence[RunResult], *, include_timing: bool = False
) -> str:
    """
    Grid results as CSV text.

    ``wall_ms`` stays empty unless ``include_timing`` is set, so repeated
    runs of the same grid produce identical files.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for result in results:
        writer.writerow(
            [
                result.solver,
                result.problem,
                result.status.value,
                result.f_evals,
                f"{result.wall_ms:.3f}" if include_timing else "",
                f"{result.f_norm:.6e}",
            ]
        )
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Text
# ---------------------------------------------------------------------------


def format_results_table(results: Sequence[RunResult]) -> str:
    """
    F-evaluations per problem and solver.

    Failed runs show their flag (it, fmax, sigma, incr, crash) instead of
    a count; the last row gives each solver's solved share.
    """
    if not results:
        return ""
    table = performance_profile(results)
    cells = {(r.problem, r.solver): r for r in results}

    def cell(problem: str, solver: str) -> str:
        result = cells.get((problem, solver))
        if result is None:
            return "-"
        return str(result.f_evals) if result.converged else result.status.flag

    summaries = {s.solver: str(s) for s in solved_summary(results)}
    rows = [["problem", *table.solvers]]
    rows.extend(
        [problem, *(cell(problem, solver) for solver in table.solvers)]
        for problem in table.problems
    )
    rows.append(["solved", *(summaries[solver] for solver in table.solvers)])

    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = [
        "  ".join(
            text.ljust(width) if i == 0 else text.rjust(width)
            for i, (text, width) in enumerate(zip(row, widths, strict=True))
        ).rstrip()
        for row in rows
    ]
    lines.insert(1, "-" * len(lines[0]))
    lines.insert(len(lines) - 1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


def profile_svg(table: ProfileTable) -> str:
    """Step curves of every solver's profile on a log2 tau axis."""
    tau_max = max(table.tau_max, 2.0)
    buffer = io.StringIO()
    with mpl.rc_context(_SVG_RC):
        fig = Figure(figsize=(7, 4.5))
        ax = fig.subplots()
        for solver in table.solvers:
            vertices = table.step_vertices(solver)
            taus = [tau for tau, _ in vertices]
            values = [value for _, value in vertices]
            if taus[-1] < tau_max:
                taus.append(tau_max)
                values.append(values[-1])
            ax.step(taus, values, where="post", label=solver)
        ax.set_xscale("log", base=2)
        ax.set_xlim(1.0, tau_max)
        ax.set_ylim(0.0, 1.05)
        ax.set_xlabel("tau")
        ax.set_ylabel("fraction of problems")
        ax.set_title("Performance profile (F-evaluations)")
        ax.grid(visible=True, which="both", alpha=0.3)
        ax.legend(loc="lower right", fontsize="small")
        fig.tight_layout()
        fig.savefig(buffer, format="svg", metadata=_SVG_METADATA)
    return buffer.getvalue()


def plot_trace(report: SolverReport, path: Path) -> Path:
    """SVG of ||F_k|| and backtracks per iteration for one solve."""
    ks = [record.k for record in report.trace]
    norms = [record.f_norm for record in report.trace]
    if report.trace:
        ks.append(report.trace[-1].k + 1)
        norms.append(report.trace[-1].f_next)
    buffer = io.StringIO()
    with mpl.rc_context(_SVG_RC):
        fig = Figure(figsize=(7, 5))
        top, bottom = fig.subplots(2, 1, sharex=True)
        top.semilogy(ks, norms, marker=".", linewidth=1.0)
        top.set_ylabel("||F_k||")
        top.set_title(f"{report.solver} on {report.problem}: {report.status.value}")
        bottom.bar(
            [record.k for record in report.trace],
            [record.backtracks for record in report.trace],
            width=0.8,
        )
        bottom.set_xlabel("iteration")
        bottom.set_ylabel("backtracks")
        fig.tight_layout()
        fig.savefig(buffer, format="svg", metadata=_SVG_METADATA)
    return _write_text(path, buffer.getvalue(), "trace plot")


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def emit_report(
    results: Sequence[RunResult],
    fmt: str,
    path: Path,
    *,
    include_timing: bool = False,
) -> Path:
    """Write ``results`` as a csv, svg or text artifact at ``path``."""
    if fmt == FORMAT_CSV:
        return _write_text(
            path, results_to_csv(results, include_timing=include_timing), "results"
        )
    if fmt == FORMAT_TEXT:
        return _write_text(path, format_results_table(results), "results table")
    if fmt == FORMAT_SVG:
        return _write_text(path, profile_svg(performance_profile(results)), "profile")
    msg = f"Unknown report format {fmt!r}, expected one of {', '.join(REPORT_FORMATS)}"
    raise ValueError(msg)
