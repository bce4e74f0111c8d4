"""Tests for the synthetic rolling-contact generator."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from specres.const import REGIME_ADHESION, REGIME_MIXED, REGIME_SLIP, REGIMES
from specres.contact import (
    ContactProblem,
    ProblemFormatError,
    as_nonlinear_problem,
    build_contact_problem,
    build_contact_sequence,
    contact_jacobian,
    contact_residual,
    coulomb_ratios,
    dump_contact_problem,
    element_centers,
    grid_shape,
    jacobian_structure,
    load_contact_problem,
    serialize_contact_problem,
)
from specres.newton import solve_newton_tr
from specres.problem import fd_jacobian
from specres.solver import solve


@pytest.mark.parametrize(
    ("n", "shape"),
    [(1, (1, 1)), (7, (1, 7)), (8, (2, 4)), (25, (5, 5)), (100, (10, 10))],
)
def test_grid_shape(n: int, shape: tuple[int, int]) -> None:
    """Most square factorization of n."""
    assert grid_shape(n) == shape


def test_element_centers_are_centered() -> None:
    """Grid centers have zero mean and unit spacing."""
    centers = element_centers(8)
    assert centers.shape == (8, 2)
    np.testing.assert_allclose(centers.mean(axis=0), [0.0, 0.0], atol=1e-15)
    assert np.ptp(centers[:, 0]) == 3.0
    assert np.ptp(centers[:, 1]) == 1.0


def test_build_is_reproducible() -> None:
    """Same seed, same arrays; another seed changes the creep."""
    first = build_contact_problem(25, REGIME_MIXED, 42)
    second = build_contact_problem(25, REGIME_MIXED, 42)
    np.testing.assert_array_equal(first.influence, second.influence)
    np.testing.assert_array_equal(first.creep, second.creep)
    np.testing.assert_array_equal(first.bound, second.bound)

    other = build_contact_problem(25, REGIME_MIXED, 43)
    assert not np.array_equal(first.creep, other.creep)


def test_problem_shape_and_label() -> None:
    """Two unknowns per element and a URI label."""
    problem = build_contact_problem(25, REGIME_MIXED, 42)
    assert problem.n_elements == 25
    assert problem.dimension == 50
    assert problem.label == "contact:25:mixed:42"
    assert np.all(problem.bound > 0)
    assert problem.friction is not None
    assert np.all((problem.friction >= 0.27) & (problem.friction <= 0.33))
    assert np.linalg.norm(problem.influence, ord=np.inf) == pytest.approx(1.0)


def test_regimes_scale_creep() -> None:
    """Slip-heavy creep is larger than adhesion-heavy creep."""
    adhesion = build_contact_problem(8, REGIME_ADHESION, 1)
    slip = build_contact_problem(8, REGIME_SLIP, 1)
    assert np.linalg.norm(slip.creep) > 10 * np.linalg.norm(adhesion.creep)


@pytest.mark.parametrize(("n", "regime"), [(0, REGIME_MIXED), (8, "icy")])
def test_build_rejects_bad_arguments(n: int, regime: str) -> None:
    """Non-positive sizes and unknown regimes are refused."""
    with pytest.raises(ValueError):  # noqa: PT011
        build_contact_problem(n, regime, 0)


def test_residual_at_zero_pressure_is_creep() -> None:
    """With p = 0 the slip is the creep and the friction term vanishes."""
    problem = build_contact_problem(8, REGIME_MIXED, 3)
    np.testing.assert_allclose(
        contact_residual(problem, np.zeros(problem.dimension)), problem.creep
    )


def test_jacobian_matches_finite_differences() -> None:
    """Analytic and forward-difference Jacobians agree on random points."""
    rng = np.random.default_rng(7)
    problem = build_contact_problem(8, REGIME_SLIP, 4, epsilon=1e-6)
    wrapped = as_nonlinear_problem(problem)
    for _ in range(100):
        p = rng.uniform(-0.3, 0.3, problem.dimension)
        analytic = contact_jacobian(problem, p)
        approx = fd_jacobian(wrapped, p)
        scale = 1.0 + float(np.max(np.abs(analytic)))
        assert float(np.max(np.abs(approx - analytic))) <= 1e-5 * scale


@pytest.mark.parametrize("regime", REGIMES)
def test_jacobian_is_dense_and_nonsymmetric(regime: str) -> None:
    """At least 90% nonzeros and a visible asymmetry on every instance."""
    rng = np.random.default_rng(0)
    for n in (8, 25):
        for seed in (1, 2, 3):
            problem = build_contact_problem(n, regime, seed)
            for p in (np.zeros(problem.dimension), rng.normal(0, 0.1, 2 * n)):
                structure = jacobian_structure(contact_jacobian(problem, p))
                assert structure.density >= 0.9
                assert not structure.symmetric
                assert structure.size == 2 * n


def test_coulomb_bound_at_solution() -> None:
    """Sliding elements carry traction on the friction bound."""
    problem = build_contact_problem(8, REGIME_SLIP, 1, epsilon=1e-12)
    report = solve_newton_tr(as_nonlinear_problem(problem))
    assert report.converged, report.summary()
    sliding, ratios = coulomb_ratios(problem, report.x, min_slip=1e-3)
    assert sliding.size > 0
    np.testing.assert_allclose(ratios, 1.0, atol=1e-3)


@pytest.mark.parametrize("regime", REGIMES)
def test_coulomb_law_at_spectral_solution(regime: str) -> None:
    """|p_I| / g_I = |s_I| / sqrt(|s_I|^2 + eps) <= 1 up to the residual."""
    problem = build_contact_problem(8, regime, 1)
    report = solve(as_nonlinear_problem(problem))
    assert report.converged, report.summary()

    slip = problem.slip(report.x).reshape(-1, 2)
    nu = np.sqrt(np.sum(slip**2, axis=1) + problem.epsilon)
    elements, ratios = coulomb_ratios(problem, report.x, min_slip=0.0)
    assert elements.size == problem.n_elements
    allowance = report.f_norm / nu + 1e-12
    assert np.all(ratios <= 1.0 + allowance)
    law = np.linalg.norm(slip, axis=1) / nu
    assert np.all(np.abs(ratios - law) <= allowance)


@pytest.mark.parametrize("angle", [math.pi / 2, math.pi])
def test_single_element_rotation(angle: float) -> None:
    """Rotating the creep of an isotropic element rotates residual and root."""
    rotation = np.array(
        [[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]]
    )
    creep = np.array([0.2, 0.05])
    base = ContactProblem(0.5 * np.eye(2), creep, np.array([0.3]), epsilon=1e-4)
    turned = ContactProblem(
        0.5 * np.eye(2), rotation @ creep, np.array([0.3]), epsilon=1e-4
    )

    for p in (np.zeros(2), np.array([-0.1, 0.2]), np.array([0.3, -0.3])):
        np.testing.assert_allclose(
            contact_residual(turned, rotation @ p),
            rotation @ contact_residual(base, p),
            atol=1e-14,
        )

    root = solve_newton_tr(as_nonlinear_problem(base))
    turned_root = solve_newton_tr(as_nonlinear_problem(turned))
    assert root.converged
    assert turned_root.converged
    np.testing.assert_allclose(turned_root.x, rotation @ root.x, atol=1e-5)
    # The root opposes the slip and sits close to the friction bound
    assert float(np.dot(root.x, base.slip(root.x))) < 0.0
    assert np.linalg.norm(root.x) == pytest.approx(0.3, rel=0.05)


def test_contact_sequence() -> None:
    """Steps share B and g; the first step is the base problem."""
    base = build_contact_problem(8, REGIME_MIXED, 5)
    sequence = build_contact_sequence(8, REGIME_MIXED, 5, steps=4)
    assert len(sequence) == 4
    np.testing.assert_allclose(sequence[0].creep, base.creep)
    for step in sequence:
        assert step.influence is sequence[0].influence
        assert step.label == base.label
    assert np.linalg.norm(sequence[3].creep) > np.linalg.norm(sequence[0].creep)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def test_serialization_preserves_arrays(tmp_path: Path) -> None:
    """A written problem loads back bit for bit."""
    problem = build_contact_problem(8, REGIME_SLIP, 7)
    path = dump_contact_problem(problem, tmp_path / "p.txt")
    loaded = load_contact_problem(path)
    np.testing.assert_array_equal(loaded.influence, problem.influence)
    np.testing.assert_array_equal(loaded.creep, problem.creep)
    np.testing.assert_array_equal(loaded.bound, problem.bound)
    assert loaded.label == problem.label
    assert loaded.epsilon == problem.epsilon


def test_serialized_header() -> None:
    """The text starts with the format line and the header keys."""
    text = serialize_contact_problem(build_contact_problem(8, REGIME_MIXED, 2))
    lines = text.splitlines()
    assert lines[0] == "# specres contact problem v1"
    assert lines[1:5] == [
        "n_elements: 8",
        "seed: 2",
        "regime: mixed",
        "epsilon: 0.0001",
    ]
    assert lines[5] == "[B] 16 16"


def test_load_rejects_bad_header() -> None:
    """Unknown regimes are refused."""
    text = serialize_contact_problem(build_contact_problem(8, REGIME_MIXED, 2))
    with pytest.raises(ProblemFormatError, match="header"):
        load_contact_problem(text.replace("regime: mixed", "regime: icy"))


def test_load_rejects_missing_section() -> None:
    """Every required array must be present."""
    text = serialize_contact_problem(build_contact_problem(8, REGIME_MIXED, 2))
    head, _, tail = text.partition("[c] 16")
    without_creep = head + tail.split("\n", 2)[2]
    with pytest.raises(ProblemFormatError, match=r"\[c\]"):
        load_contact_problem(without_creep)


def test_load_rejects_malformed_line() -> None:
    """Header lines need a colon."""
    with pytest.raises(ProblemFormatError, match="Malformed"):
        load_contact_problem("n_elements 8\n")


def test_load_missing_file(tmp_path: Path) -> None:
    """Unreadable files raise ProblemFormatError."""
    with pytest.raises(ProblemFormatError, match="Cannot read"):
        load_contact_problem(tmp_path / "missing.txt")


@pytest.mark.parametrize("section", ["[B] 16 16", "[c] 16", "[g] 8"])
def test_load_rejects_non_finite_values(section: str) -> None:
    """NaN entries in any array are refused."""
    problem = build_contact_problem(8, REGIME_MIXED, 2)
    lines = serialize_contact_problem(problem).splitlines()
    row = lines.index(section) + 1
    lines[row] = " ".join(["nan"] * len(lines[row].split()))
    with pytest.raises(ProblemFormatError, match="non-finite"):
        load_contact_problem("\n".join(lines))


def test_load_rejects_nan_epsilon() -> None:
    """The regularization must be a positive number."""
    text = serialize_contact_problem(build_contact_problem(8, REGIME_MIXED, 2))
    with pytest.raises(ProblemFormatError):
        load_contact_problem(text.replace("epsilon: 0.0001", "epsilon: nan"))


def test_problem_rejects_nan_bound() -> None:
    """A NaN traction bound is not positive."""
    with pytest.raises(ValueError, match="non-finite"):
        ContactProblem(np.eye(2), np.zeros(2), np.array([np.nan]), epsilon=1e-4)
