"""
Numerical checks of the spectral properties of the residual steplengths.

Along a segment ``x + t p`` the average Jacobian ``G = int_0^1 J(x + t p) dt``
satisfies ``y = G p`` exactly.  The steplengths can then be written through
Rayleigh quotients of ``G_S = (G + G')/2`` and ``G'G``, which yields sign,
ordering and eigenvalue bounds that are checked here inequality by
inequality.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import roots_legendre

from .const import DEFAULT_QUADRATURE_NODES
from .problem import (
    EvalCounter,
    Matrix,
    NonlinearProblem,
    SpecresError,
    Vector,
    evaluate,
    evaluate_jacobian,
)
from .steplength import raw_beta1, raw_beta2

_LOGGER = logging.getLogger(__name__)

CASE_SPD = "i"
CASE_PD = "ii"
CASE_ND = "ii-neg"
CASE_INDEFINITE = "iii"
CASE_NONE = "none"

FLAG_ASSUMPTION = "p'y = 0: steplengths undefined"

REL_EQUAL = "=="
REL_LE = "<="
REL_LT = "<"

# Eigenvalue magnitude below which G_S counts as semidefinite
_DEFINITE_TOL = 1e-12
_SYMMETRY_TOL = 1e-10


class InconsistentSecantError(SpecresError):
    """The residual difference does not match G p."""


class NonsymmetricJacobianError(SpecresError):
    """The Jacobian is not symmetric along the segment."""


# ---------------------------------------------------------------------------
# Report types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InequalityCheck:
    """One checked relation ``lhs <relation> rhs`` with a relative tolerance."""

    name: str
    lhs: float
    rhs: float
    relation: str = REL_LE
    tol: float = 1e-10

    @property
    def slack(self) -> float:
        """Signed margin, negative when the relation is violated."""
        if self.relation == REL_EQUAL:
            return -abs(self.lhs - self.rhs)
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        """Return True if the relation holds within tolerance."""
        scale = max(abs(self.lhs), abs(self.rhs))
        if self.relation == REL_LT:
            return self.lhs < self.rhs
        return self.slack >= -self.tol * scale

    def format_line(self) -> str:
        """Render as a single report line."""
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name:<34} {self.relation:>2} lhs={self.lhs: .6e} "
            f"rhs={self.rhs: .6e} slack={self.slack: .3e} {verdict}"
        )


@dataclass
class VerificationReport:
    """Checked inequalities for one instance."""

    name: str
    case: str = CASE_NONE
    checks: list[InequalityCheck] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Return True if every check passed."""
        return all(check.passed for check in self.checks)

    @property
    def violations(self) -> list[InequalityCheck]:
        """Checks that failed."""
        return [check for check in self.checks if not check.passed]

    def add(
        self,
        name: str,
        lhs: float,
        rhs: float,
        relation: str = REL_LE,
        tol: float = 1e-10,
    ) -> None:
        """Append a check."""
        self.checks.append(InequalityCheck(name, lhs, rhs, relation, tol))


def format_report(report: VerificationReport) -> str:
    """Structured text, one line per inequality."""
    lines = [f"# {report.name} (case {report.case})"]
    lines.extend(f"! {flag}" for flag in report.flags)
    lines.extend(check.format_line() for check in report.checks)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Average matrices and Rayleigh quotients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AverageMatrices:
    """Average Jacobian over the segment from ``x`` to ``x + p``."""

    G: Matrix  # noqa: N815
    G_S: Matrix  # noqa: N815
    nodes: int
    x: Vector
    p: Vector
    max_asymmetry: float = 0.0

    @classmethod
    def from_matrix(cls, matrix: Matrix, x: Vector, p: Vector) -> AverageMatrices:
        """Matrices of a linear map, where G is the map itself."""
        g = np.asarray(matrix, dtype=float)
        return cls(
            G=g,
            G_S=0.5 * (g + g.T),
            nodes=1,
            x=x,
            p=p,
            max_asymmetry=float(np.max(np.abs(g - g.T))),
        )


def average_jacobian(
    problem: NonlinearProblem,
    x: Vector,
    p: Vector,
    nodes: int = DEFAULT_QUADRATURE_NODES,
) -> AverageMatrices:
    """
    Integrate J(x + t p) over t in [0, 1] by Gauss-Legendre quadrature.

    Exact when J is a polynomial in t of degree at most 2 * nodes - 1.
    """
    if nodes < 1:
        msg = f"Quadrature needs at least one node, got {nodes}"
        raise ValueError(msg)
    points, weights = roots_legendre(nodes)
    n = problem.dimension
    g = np.zeros((n, n))
    asym = 0.0
    for t, w in zip(0.5 * (points + 1.0), 0.5 * weights, strict=True):
        jac = evaluate_jacobian(problem, x + t * p)
        asym = max(asym, float(np.max(np.abs(jac - jac.T))))
        g += w * jac
    return AverageMatrices(
        G=g, G_S=0.5 * (g + g.T), nodes=nodes, x=x, p=p, max_asymmetry=asym
    )


def rayleigh_quotient(matrix: Matrix, p: Vector) -> float:
    """q(M, p) = p'Mp / p'p."""
    return float(p @ matrix @ p) / float(p @ p)


def _extreme_eigenvalues(matrix: Matrix) -> tuple[float, float]:
    values = linalg.eigh(matrix, eigvals_only=True)
    return float(values[0]), float(values[-1])


@dataclass(frozen=True)
class RayleighReport:
    """Rayleigh quotients of G_S and G'G with their extreme eigenvalues."""

    q_gs: float
    q_gtg: float
    gs_min: float
    gs_max: float
    gtg_min: float
    gtg_max: float

    def sandwich_checks(self) -> list[InequalityCheck]:
        """lambda_min(M) <= q(M, p) <= lambda_max(M) for both matrices."""
        return [
            InequalityCheck("lmin(G_S) <= q(G_S,p)", self.gs_min, self.q_gs),
            InequalityCheck("q(G_S,p) <= lmax(G_S)", self.q_gs, self.gs_max),
            InequalityCheck("lmin(G'G) <= q(G'G,p)", self.gtg_min, self.q_gtg),
            InequalityCheck("q(G'G,p) <= lmax(G'G)", self.q_gtg, self.gtg_max),
        ]


def rayleigh_report(matrices: AverageMatrices, p: Vector) -> RayleighReport:
    """Compute quotients and extreme eigenvalues for direction ``p``."""
    gtg = matrices.G.T @ matrices.G
    gs_min, gs_max = _extreme_eigenvalues(matrices.G_S)
    gtg_min, gtg_max = _extreme_eigenvalues(gtg)
    return RayleighReport(
        q_gs=rayleigh_quotient(matrices.G_S, p),
        q_gtg=rayleigh_quotient(gtg, p),
        gs_min=gs_min,
        gs_max=gs_max,
        gtg_min=gtg_min,
        gtg_max=gtg_max,
    )


# ---------------------------------------------------------------------------
# Steplength sign and ordering
# ---------------------------------------------------------------------------


def _sign_and_order(
    report: VerificationReport, b1: float, b2: float, tol: float
) -> None:
    report.add("b1 * b2 > 0", 0.0, b1 * b2, REL_LT)
    report.add("|b2| <= |b1|", abs(b2), abs(b1), tol=tol)
    if b1 > 0:
        report.add("0 < b2 <= b1", b2, b1, tol=tol)
    else:
        report.add("b1 <= b2 < 0", b1, b2, tol=tol)


def check_steplength_pair(
    p: Vector, y: Vector, tol: float = 1e-12
) -> VerificationReport:
    """Sign, ordering and the cosine identity b2 = b1 cos^2(phi) for a raw pair."""
    report = VerificationReport("steplength pair")
    b1 = raw_beta1(p, y)
    b2 = raw_beta2(p, y)
    if b1 is None or b2 is None:
        report.flags.append(FLAG_ASSUMPTION)
        return report
    _sign_and_order(report, b1, b2, tol)
    cos_phi = float(p @ y) / (float(np.linalg.norm(p)) * float(np.linalg.norm(y)))
    report.add("b2 == b1 cos^2(phi)", b2, b1 * cos_phi**2, REL_EQUAL, tol)
    return report


def check_lemma1(
    p: Vector,
    y: Vector,
    matrices: AverageMatrices,
    tol: float = 1e-8,
    secant_tol: float = 1e-8,
) -> VerificationReport:
    """
    Check the steplengths against the Rayleigh quotients of G_S and G'G.

    Raises InconsistentSecantError unless ``y = G p`` to ``secant_tol``.
    """
    gp = matrices.G @ p
    scale = float(np.linalg.norm(y)) + float(np.linalg.norm(gp))
    gap = float(np.linalg.norm(y - gp))
    if gap > secant_tol * max(scale, 1.0):
        msg = f"Residual difference deviates from G p by {gap:.3e}"
        raise InconsistentSecantError(msg)

    report = VerificationReport("steplength / Rayleigh quotient")
    b1 = raw_beta1(p, y)
    b2 = raw_beta2(p, y)
    if b1 is None or b2 is None:
        report.flags.append(FLAG_ASSUMPTION)
        return report

    _sign_and_order(report, b1, b2, tol)
    rq = rayleigh_report(matrices, p)
    report.checks.extend(rq.sandwich_checks())
    report.add("b1 == 1/q(G_S,p)", b1, 1.0 / rq.q_gs, REL_EQUAL, tol)
    report.add("b2 == q(G_S,p)/q(G'G,p)", b2, rq.q_gs / rq.q_gtg, REL_EQUAL, tol)
    return report


# ---------------------------------------------------------------------------
# Eigenvalue bounds
# ---------------------------------------------------------------------------


def _is_positive(lmin: float, lmax: float) -> bool:
    return lmin > _DEFINITE_TOL * (1.0 + abs(lmax))


def classify_case(matrices: AverageMatrices) -> str:
    """Which family of bounds applies to the matrices."""
    g = matrices.G
    gs_min, gs_max = _extreme_eigenvalues(matrices.G_S)
    symmetric = float(np.max(np.abs(g - g.T))) <= _DEFINITE_TOL * (
        1.0 + float(np.max(np.abs(g)))
    )
    if _is_positive(gs_min, gs_max):
        return CASE_SPD if symmetric else CASE_PD
    if _is_positive(-gs_max, -gs_min):
        return CASE_ND
    tol = _DEFINITE_TOL * (1.0 + max(abs(gs_min), abs(gs_max)))
    gtg_min, gtg_max = _extreme_eigenvalues(g.T @ g)
    if gs_min < -tol and gs_max > tol and gtg_min > _DEFINITE_TOL * gtg_max:
        return CASE_INDEFINITE
    return CASE_NONE


def _definite_bounds(  # noqa: PLR0913
    report: VerificationReport,
    b1: float,
    b2: float,
    rq: RayleighReport,
    tol: float,
    prefix: str = "",
) -> None:
    report.add(f"{prefix}1/lmax(G_S) <= b1", 1.0 / rq.gs_max, b1, tol=tol)
    report.add(f"{prefix}b2 <= b1", b2, b1, tol=tol)
    report.add(f"{prefix}b1 <= 1/lmin(G_S)", b1, 1.0 / rq.gs_min, tol=tol)
    report.add(
        f"{prefix}lmin(G_S)/lmax(G'G) <= b2", rq.gs_min / rq.gtg_max, b2, tol=tol
    )
    report.add(
        f"{prefix}b2 <= lmax(G_S)/lmin(G'G)", b2, rq.gs_max / rq.gtg_min, tol=tol
    )


def check_lemma2_bounds(
    matrices: AverageMatrices, p: Vector, tol: float = 1e-10
) -> VerificationReport:
    """Check the eigenvalue bounds on b1, b2 for the detected case."""
    case = classify_case(matrices)
    report = VerificationReport("steplength eigenvalue bounds", case=case)
    y = matrices.G @ p
    b1 = raw_beta1(p, y)
    b2 = raw_beta2(p, y)
    if b1 is None or b2 is None:
        report.flags.append(FLAG_ASSUMPTION)
        return report

    rq = rayleigh_report(matrices, p)
    if case == CASE_SPD:
        # G symmetric positive definite: G_S = G
        report.add("1/lmax(G) <= b2", 1.0 / rq.gs_max, b2, tol=tol)
        report.add("b2 <= b1", b2, b1, tol=tol)
        report.add("b1 <= 1/lmin(G)", b1, 1.0 / rq.gs_min, tol=tol)
    elif case == CASE_PD:
        _definite_bounds(report, b1, b2, rq, tol)
    elif case == CASE_ND:
        mirrored = RayleighReport(
            q_gs=-rq.q_gs,
            q_gtg=rq.q_gtg,
            gs_min=-rq.gs_max,
            gs_max=-rq.gs_min,
            gtg_min=rq.gtg_min,
            gtg_max=rq.gtg_max,
        )
        _definite_bounds(report, -b1, -b2, mirrored, tol, prefix="[-G] ")
    elif case == CASE_INDEFINITE:
        if b1 < 0:
            report.add("b1 <= 1/lmin(G_S)", b1, 1.0 / rq.gs_min, tol=tol)
            report.add("b1 <= b2", b1, b2, tol=tol)
        else:
            report.add("1/lmax(G_S) <= b1", 1.0 / rq.gs_max, b1, tol=tol)
            report.add("b2 <= b1", b2, b1, tol=tol)
        if b2 > 0:
            upper = rq.gs_max / rq.gtg_min
            report.add("b2 <= lmax(G_S)/lmin(G'G)", b2, upper, tol=tol)
        else:
            # Negative quotient is bounded by the most negative G_S eigenvalue
            # over the smallest G'G eigenvalue.
            lower = rq.gs_min / rq.gtg_min
            report.add("lmin(G_S)/lmin(G'G) <= b2", lower, b2, tol=tol)
    else:
        report.flags.append("no bound family applies (singular or semidefinite)")
    return report


# ---------------------------------------------------------------------------
# Eigencomponent recurrence
# ---------------------------------------------------------------------------


ITEM_ANNIHILATED = "a"
ITEM_DECREASE = "b-decrease"
ITEM_NONDECREASE = "b-nondecrease"


@dataclass
class Lemma3Report(VerificationReport):
    """Eigencomponents of F_k and F_{k+1} in the eigenbasis of G_k."""

    eigenvalues: Vector = field(default_factory=lambda: np.zeros(0))
    mu_k: Vector = field(default_factory=lambda: np.zeros(0))
    mu_next: Vector = field(default_factory=lambda: np.zeros(0))
    items: list[str] = field(default_factory=list)


def symmetric_eigenbasis(matrix: Matrix) -> tuple[Vector, Matrix]:
    """
    Eigenpairs of a symmetric matrix in ascending order.

    Each eigenvector is oriented so its largest-magnitude entry is positive.
    """
    values, vectors = linalg.eigh(matrix)
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return values, vectors * signs


def check_lemma3_recurrence(
    problem: NonlinearProblem,
    x_k: Vector,
    beta_k: float,
    nodes: int = DEFAULT_QUADRATURE_NODES,
    tol: float = 1e-8,
) -> Lemma3Report:
    """
    Compare the eigencomponents of F_{k+1} = F(x_k - beta_k F_k) with the
    prediction mu_k (1 - beta_k lambda_i).
    """
    counter = EvalCounter()
    f_k = evaluate(problem, x_k, counter)
    p = -beta_k * f_k
    f_next = evaluate(problem, x_k + p, counter)
    matrices = average_jacobian(problem, x_k, p, nodes)
    scale = 1.0 + float(np.max(np.abs(matrices.G)))
    if matrices.max_asymmetry > _SYMMETRY_TOL * scale:
        msg = f"Jacobian asymmetry {matrices.max_asymmetry:.3e} on the segment"
        raise NonsymmetricJacobianError(msg)

    values, vectors = symmetric_eigenbasis(matrices.G_S)
    mu_k = vectors.T @ f_k
    mu_next = vectors.T @ f_next
    predicted = mu_k * (1.0 - beta_k * values)

    report = Lemma3Report(
        "eigencomponent recurrence",
        case="symmetric",
        eigenvalues=values,
        mu_k=mu_k,
        mu_next=mu_next,
    )
    ref = max(1.0, float(np.linalg.norm(f_k)))
    for i, product in enumerate(beta_k * values):
        after = abs(float(mu_next[i]))
        before = abs(float(mu_k[i]))
        gap = abs(float(mu_next[i] - predicted[i]))
        report.add(f"|mu[{i}] - predicted|", gap, tol * ref)
        if math.isclose(product, 1.0, rel_tol=1e-12):
            report.items.append(ITEM_ANNIHILATED)
            report.add(f"|mu[{i}]| annihilated", after, tol * ref)
        elif 0.0 < product < 2.0:
            report.items.append(ITEM_DECREASE)
            report.add(f"|mu[{i}]| decreases", after, before + tol * ref)
        else:
            report.items.append(ITEM_NONDECREASE)
            report.add(f"|mu[{i}]| does not decrease", before, after + tol * ref)
    return report


# ---------------------------------------------------------------------------
# Acceptance intervals of the scaled step
# ---------------------------------------------------------------------------


SIGN_CASE_POSITIVE = "q(G_S,F) > 0"
SIGN_CASE_NEGATIVE = "q(G_S,F) < 0"
SIGN_CASE_NONE = "q(G_S,F) = 0"


@dataclass(frozen=True)
class Theorem1Intervals:
    """
    Ranges of t = gamma * beta for which the residual step is accepted.

    ``descent_*`` are open intervals of strict decrease of ||F||,
    ``and_*`` closed intervals where ||F_{k+1}|| <= (1 + eta) ||F_k||.
    The minus direction is x - t F, the plus direction x + t F.
    """

    descent_minus: tuple[float, float] | None
    descent_plus: tuple[float, float] | None
    and_minus: tuple[float, float]
    and_plus: tuple[float, float]
    sign_case: str
    delta: float
    q_gs: float
    q_gtg: float


def theorem1_intervals(
    matrices: AverageMatrices, f_k: Vector, eta_k: float
) -> Theorem1Intervals:
    """Acceptance ranges of t for the steps x -/+ t F_k under the model F + G p."""
    if not np.any(f_k):
        msg = "Acceptance intervals need F_k != 0"
        raise ValueError(msg)
    q_s = rayleigh_quotient(matrices.G_S, f_k)
    q_g = rayleigh_quotient(matrices.G.T @ matrices.G, f_k)
    if q_g <= 0.0:
        msg = "Acceptance intervals need q(G'G, F_k) > 0"
        raise ValueError(msg)

    delta = q_s**2 + (eta_k**2 + 2.0 * eta_k) * q_g
    root = math.sqrt(delta)
    and_minus = ((q_s - root) / q_g, (q_s + root) / q_g)
    and_plus = ((-q_s - root) / q_g, (-q_s + root) / q_g)

    bound = 2.0 * q_s / q_g
    if q_s > 0:
        sign_case = SIGN_CASE_POSITIVE
        descent_minus: tuple[float, float] | None = (0.0, bound)
        descent_plus: tuple[float, float] | None = (-bound, 0.0)
    elif q_s < 0:
        sign_case = SIGN_CASE_NEGATIVE
        descent_minus = (bound, 0.0)
        descent_plus = (0.0, -bound)
    else:
        sign_case = SIGN_CASE_NONE
        descent_minus = descent_plus = None
        _LOGGER.debug("F_k'G_S F_k = 0: no direction gives strict descent")

    return Theorem1Intervals(
        descent_minus=descent_minus,
        descent_plus=descent_plus,
        and_minus=and_minus,
        and_plus=and_plus,
        sign_case=sign_case,
        delta=delta,
        q_gs=q_s,
        q_gtg=q_g,
    )


def step_norm_ratio(matrix: Matrix, f_k: Vector, t: float, sign: int = -1) -> float:
    """||F + sign * t * G F|| / ||F||, exact for a linear residual."""
    f_next = f_k + sign * t * (matrix @ f_k)
    return float(np.linalg.norm(f_next)) / float(np.linalg.norm(f_k))
