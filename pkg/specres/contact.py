"""
Synthetic tangential rolling-contact systems.

The contact patch is a rectangular grid of ``N`` elements.  Unknowns are the
tangential pressures ``p`` (two per element, interleaved x/y).  The slip is
affine in ``p``, ``s = c + B p``, with creep ``c`` and a dense nonsymmetric
influence matrix ``B``.  The regularized Coulomb law gives the residual

    F_I(p) = s_I + sqrt(|s_I|^2 + eps) * p_I / g_I

per element, where ``g_I = f_I * pN_I`` is the traction bound.  Pressures are
nondimensionalized by the peak normal pressure.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import voluptuous as vol

from .const import REGIME_ADHESION, REGIME_MIXED, REGIME_SLIP, REGIMES
from .problem import Matrix, NonlinearProblem, SpecresError, Vector

_LOGGER = logging.getLogger(__name__)

# Kernel anisotropy
_X_WEIGHT = 1.0
_Y_WEIGHT = 0.7
_CROSS_WEIGHT = 0.3
_SKEW_WEIGHT = 0.1

# Friction coefficient f = 0.3 * (1 + 0.1 u), u uniform in [-1, 1]
_FRICTION_MEAN = 0.3
_FRICTION_SPREAD = 0.1

# Creep magnitude per regime, relative to the unit traction scale
REGIME_CREEP: dict[str, float] = {
    REGIME_ADHESION: 0.02,
    REGIME_MIXED: 0.1,
    REGIME_SLIP: 1.0,
}
_SPIN_WEIGHT = 0.3

# Default regularization per regime, sqrt(eps) = 0.1 * creep magnitude
REGIME_EPSILON: dict[str, float] = {
    REGIME_ADHESION: 4e-6,
    REGIME_MIXED: 1e-4,
    REGIME_SLIP: 1e-2,
}

FORMAT_MAGIC = "# specres contact problem v1"


class ProblemFormatError(SpecresError):
    """A serialized contact problem could not be parsed."""


HEADER_SCHEMA = vol.Schema(
    {
        vol.Required("n_elements"): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Required("seed"): vol.Coerce(int),
        vol.Required("regime"): vol.In(REGIMES),
        vol.Required("epsilon"): vol.All(
            vol.Coerce(float), vol.Range(min=0.0, min_included=False)
        ),
    }
)


def grid_shape(n_elements: int) -> tuple[int, int]:
    """Rows and columns of the most square grid with rows * cols = n."""
    rows = max(d for d in range(1, math.isqrt(n_elements) + 1) if n_elements % d == 0)
    return rows, n_elements // rows


def element_centers(n_elements: int) -> Matrix:
    """Centers (x, y) of a unit-spaced grid, centered at the origin."""
    rows, cols = grid_shape(n_elements)
    xs = np.arange(cols) - (cols - 1) / 2.0
    ys = np.arange(rows) - (rows - 1) / 2.0
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class ContactProblem:
    """Discretized tangential contact problem."""

    influence: Matrix
    creep: Vector
    bound: Vector
    epsilon: float
    friction: Vector | None = None
    p_normal: Vector | None = None
    regime: str = REGIME_MIXED
    seed: int = 0

    def __post_init__(self) -> None:
        n = self.bound.size
        if self.influence.shape != (2 * n, 2 * n) or self.creep.shape != (2 * n,):
            msg = (
                f"Inconsistent contact arrays: B {self.influence.shape}, "
                f"c {self.creep.shape}, g {self.bound.shape}"
            )
            raise ValueError(msg)
        arrays = {"B": self.influence, "c": self.creep, "g": self.bound}
        if self.friction is not None:
            arrays["f"] = self.friction
        if self.p_normal is not None:
            arrays["p_normal"] = self.p_normal
        for name, values in arrays.items():
            if not np.all(np.isfinite(values)):
                msg = f"Contact array {name} has non-finite entries"
                raise ValueError(msg)
        if not np.all(self.bound > 0):
            msg = "Traction bound must be positive on every element"
            raise ValueError(msg)
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            msg = "Regularization epsilon must be positive and finite"
            raise ValueError(msg)

    @property
    def n_elements(self) -> int:
        """Number of mesh elements."""
        return int(self.bound.size)

    @property
    def dimension(self) -> int:
        """Number of unknowns, two per element."""
        return 2 * self.n_elements

    @property
    def label(self) -> str:
        """Problem URI."""
        return f"contact:{self.n_elements}:{self.regime}:{self.seed}"

    def slip(self, p: Vector) -> Vector:
        """s = c + B p."""
        return self.creep + self.influence @ p


# ---------------------------------------------------------------------------
# Generator
# ---------------------------------------------------------------------------


def influence_matrix(centers: Matrix) -> Matrix:
    """
    Dense nonsymmetric influence matrix scaled to unit infinity norm.

    The element kernel 1 / (1 + d) couples x and y pressures through a
    positive definite 2x2 weight, and an extra x-x term proportional to the
    sign of the x offset breaks symmetry.
    """
    dx = centers[None, :, 0] - centers[:, None, 0]
    dist = np.hypot(dx, centers[None, :, 1] - centers[:, None, 1])
    kernel = 1.0 / (1.0 + dist)
    weights = np.array([[_X_WEIGHT, _CROSS_WEIGHT], [_CROSS_WEIGHT, _Y_WEIGHT]])
    skew = np.array([[_SKEW_WEIGHT, 0.0], [0.0, 0.0]])
    b = np.kron(kernel, weights) + np.kron(np.sign(dx) * kernel, skew)
    return b / np.linalg.norm(b, ord=np.inf)


def normal_pressure(centers: Matrix) -> Vector:
    """Semi-ellipsoidal normal pressure covering the grid, peak 1."""
    half_x = max(float(np.max(np.abs(centers[:, 0]))) + 0.5, 0.5)
    half_y = max(float(np.max(np.abs(centers[:, 1]))) + 0.5, 0.5)
    a = math.sqrt(2.0) * half_x
    b = math.sqrt(2.0) * half_y
    radial = 1.0 - (centers[:, 0] / a) ** 2 - (centers[:, 1] / b) ** 2
    pressure = np.sqrt(np.clip(radial, 0.0, None))
    return pressure / np.max(pressure)


def build_contact_problem(
    n_elements: int,
    regime: str,
    seed: int,
    epsilon: float | None = None,
) -> ContactProblem:
    """
    Generate a reproducible contact problem.

    ``epsilon`` defaults to the regime's entry in :data:`REGIME_EPSILON`.
    """
    if n_elements < 1:
        msg = f"n_elements must be positive, got {n_elements}"
        raise ValueError(msg)
    if regime not in REGIME_CREEP:
        msg = f"Unknown regime {regime!r}; expected one of {', '.join(REGIMES)}"
        raise ValueError(msg)

    rng = np.random.default_rng(seed)
    centers = element_centers(n_elements)
    influence = influence_matrix(centers)
    p_normal = normal_pressure(centers)
    friction = _FRICTION_MEAN * (
        1.0 + _FRICTION_SPREAD * rng.uniform(-1.0, 1.0, n_elements)
    )

    # Longitudinal-dominant creep direction plus a spin about the patch center
    angle = rng.uniform(-math.pi / 6, math.pi / 6)
    direction = np.array([math.cos(angle), math.sin(angle)])
    radius = max(float(np.max(np.hypot(centers[:, 0], centers[:, 1]))), 1.0)
    spin = rng.uniform(-1.0, 1.0) * _SPIN_WEIGHT / radius
    rotational = spin * np.column_stack([-centers[:, 1], centers[:, 0]])
    creep = REGIME_CREEP[regime] * (direction[None, :] + rotational)

    problem = ContactProblem(
        influence=influence,
        creep=creep.ravel(),
        bound=friction * p_normal,
        epsilon=REGIME_EPSILON[regime] if epsilon is None else epsilon,
        friction=friction,
        p_normal=p_normal,
        regime=regime,
        seed=seed,
    )
    _LOGGER.debug("Built contact problem %s", problem.label)
    return problem


def build_contact_sequence(
    n_elements: int,
    regime: str,
    seed: int,
    steps: int,
    drift: float = 0.05,
) -> list[ContactProblem]:
    """
    Successive time instances sharing B and g with smoothly varying creep.

    The creep rotates by ``drift`` radians and grows by ``drift`` relative
    per step.
    """
    base = build_contact_problem(n_elements, regime, seed)
    blocks = base.creep.reshape(-1, 2)
    sequence: list[ContactProblem] = []
    for step in range(steps):
        theta = drift * step
        rotation = np.array(
            [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
        )
        creep = (1.0 + drift * step) * (blocks @ rotation.T)
        sequence.append(
            ContactProblem(
                influence=base.influence,
                creep=creep.ravel(),
                bound=base.bound,
                epsilon=base.epsilon,
                friction=base.friction,
                p_normal=base.p_normal,
                regime=regime,
                seed=seed,
            )
        )
    return sequence


# ---------------------------------------------------------------------------
# Residual and Jacobian
# ---------------------------------------------------------------------------


def _blocks(problem: ContactProblem, p: Vector) -> tuple[Matrix, Matrix, Vector]:
    slip = problem.slip(p).reshape(-1, 2)
    pressure = np.asarray(p, dtype=float).reshape(-1, 2)
    nu = np.sqrt(np.sum(slip**2, axis=1) + problem.epsilon)
    return slip, pressure, nu


def contact_residual(problem: ContactProblem, p: Vector) -> Vector:
    """F_I = s_I + sqrt(|s_I|^2 + eps) p_I / g_I."""
    slip, pressure, nu = _blocks(problem, p)
    values = slip + (nu / problem.bound)[:, None] * pressure
    return values.ravel()


def contact_jacobian(problem: ContactProblem, p: Vector) -> Matrix:
    """Analytic Jacobian of :func:`contact_residual`."""
    slip, pressure, nu = _blocks(problem, p)
    n = problem.n_elements
    rows = problem.influence.reshape(n, 2, 2 * n)
    # d nu_I / d p = s_I' B_I / nu_I
    grad_nu = np.einsum("ik,ikj->ij", slip, rows) / nu[:, None]
    coupling = (pressure / problem.bound[:, None])[:, :, None] * grad_nu[:, None, :]
    jac = problem.influence + coupling.reshape(2 * n, 2 * n)
    jac[np.diag_indices(2 * n)] += np.repeat(nu / problem.bound, 2)
    return jac


def as_nonlinear_problem(problem: ContactProblem) -> NonlinearProblem:
    """Wrap as a :class:`NonlinearProblem` starting from zero pressure."""
    return NonlinearProblem(
        label=problem.label,
        dimension=problem.dimension,
        residual=lambda p: contact_residual(problem, p),
        initial_point=np.zeros(problem.dimension),
        jacobian=lambda p: contact_jacobian(problem, p),
    )


def coulomb_ratios(
    problem: ContactProblem, p: Vector, min_slip: float
) -> tuple[Vector, Vector]:
    """
    Return (element indices, |p_I| / g_I) for elements with |s_I| >= min_slip.

    At a solution these ratios are close to one (sliding elements sit on the
    friction bound).
    """
    slip, pressure, _ = _blocks(problem, p)
    sliding = np.flatnonzero(np.linalg.norm(slip, axis=1) >= min_slip)
    ratios = np.linalg.norm(pressure[sliding], axis=1) / problem.bound[sliding]
    return sliding, ratios


# ---------------------------------------------------------------------------
# Jacobian structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JacobianStructure:
    """Qualitative structure of a dense Jacobian."""

    density: float
    asymmetry: float
    dominance_violations: int
    size: int

    @property
    def symmetric(self) -> bool:
        """Return True if J equals its transpose up to rounding."""
        return self.asymmetry <= 1e-14

    @property
    def diagonally_dominant(self) -> bool:
        """Return True if no row has off-diagonal mass above its diagonal."""
        return self.dominance_violations == 0


def jacobian_structure(jac: Matrix, zero_tol: float = 0.0) -> JacobianStructure:
    """Density, relative asymmetry and row diagonal dominance of ``jac``."""
    size = jac.shape[0]
    density = float(np.count_nonzero(np.abs(jac) > zero_tol)) / jac.size
    scale = float(np.linalg.norm(jac))
    asymmetry = float(np.linalg.norm(jac - jac.T)) / scale if scale else 0.0
    diagonal = np.abs(np.diag(jac))
    off = np.sum(np.abs(jac), axis=1) - diagonal
    return JacobianStructure(
        density=density,
        asymmetry=asymmetry,
        dominance_violations=int(np.count_nonzero(off > diagonal)),
        size=size,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _format_values(values: Vector) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def serialize_contact_problem(problem: ContactProblem) -> str:
    """
    Text serialization: ``key: value`` header lines, then one section per
    array, introduced by ``[name] shape`` and written row-major with 17
    significant digits.
    """
    n = problem.n_elements
    lines = [
        FORMAT_MAGIC,
        f"n_elements: {n}",
        f"seed: {problem.seed}",
        f"regime: {problem.regime}",
        f"epsilon: {problem.epsilon!r}",
        f"[B] {2 * n} {2 * n}",
    ]
    lines.extend(_format_values(row) for row in problem.influence)
    lines.extend([f"[c] {2 * n}", _format_values(problem.creep)])
    lines.extend([f"[g] {n}", _format_values(problem.bound)])
    if problem.friction is not None:
        lines.extend([f"[f] {n}", _format_values(problem.friction)])
    if problem.p_normal is not None:
        lines.extend([f"[p_normal] {n}", _format_values(problem.p_normal)])
    return "\n".join(lines) + "\n"


def dump_contact_problem(problem: ContactProblem, path: Path) -> Path:
    """Write a serialized problem to ``path``."""
    try:
        path.write_text(serialize_contact_problem(problem), encoding="utf-8")
    except OSError as err:
        msg = f"Cannot write contact problem to {path}: {err}"
        raise ProblemFormatError(msg) from err
    return path


def _parse_sections(text: str) -> tuple[dict[str, str], dict[str, list[str]]]:
    header: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            name, _, shape = line[1:].partition("]")
            current = [shape.strip()]
            sections[name.strip()] = current
        elif current is None:
            key, sep, value = line.partition(":")
            if not sep:
                msg = f"Malformed header line {line!r}"
                raise ProblemFormatError(msg)
            header[key.strip()] = value.strip()
        else:
            current.append(line)
    return header, sections


def _section_array(sections: dict[str, list[str]], name: str) -> Vector:
    if name not in sections:
        msg = f"Missing array section [{name}]"
        raise ProblemFormatError(msg)
    shape_text, *rows = sections[name]
    try:
        shape = tuple(int(v) for v in shape_text.split())
        values = np.array([float(v) for row in rows for v in row.split()])
        return values.reshape(shape)
    except ValueError as err:
        msg = f"Malformed array section [{name}]: {err}"
        raise ProblemFormatError(msg) from err


def load_contact_problem(source: str | Path) -> ContactProblem:
    """Parse a problem from serialized text or a file path."""
    if isinstance(source, Path):
        try:
            text = source.read_text(encoding="utf-8")
        except OSError as err:
            msg = f"Cannot read contact problem {source}: {err}"
            raise ProblemFormatError(msg) from err
    else:
        text = source

    header_raw, sections = _parse_sections(text)
    try:
        header: dict[str, Any] = HEADER_SCHEMA(header_raw)
    except vol.Invalid as err:
        msg = f"Invalid contact problem header: {err}"
        raise ProblemFormatError(msg) from err

    n = header["n_elements"]
    influence = _section_array(sections, "B")
    creep = _section_array(sections, "c")
    bound = _section_array(sections, "g")
    friction = _section_array(sections, "f") if "f" in sections else None
    p_normal = _section_array(sections, "p_normal") if "p_normal" in sections else None
    if bound.shape != (n,):
        msg = f"Section [g] has shape {bound.shape}, expected ({n},)"
        raise ProblemFormatError(msg)
    try:
        return ContactProblem(
            influence=influence,
            creep=creep,
            bound=bound,
            epsilon=header["epsilon"],
            friction=friction,
            p_normal=p_normal,
            regime=header["regime"],
            seed=header["seed"],
        )
    except ValueError as err:
        raise ProblemFormatError(str(err)) from err
