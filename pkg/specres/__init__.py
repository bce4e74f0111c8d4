"""The specres spectral residual library."""

from __future__ import annotations

from .config import ConfigError, SolverConfig, TrustRegionConfig
from .newton import solve_newton_tr
from .problem import (
    CapabilityError,
    EvalCounter,
    EvaluationError,
    NonlinearProblem,
    SpecresError,
    evaluate,
    fd_jacobian,
)
from .results import IterationRecord, SolverReport, SolverStatus
from .solver import solve, solve_sequence
from .steplength import RULES, RuleKind, rule_from_name

__all__ = [
    "RULES",
    "CapabilityError",
    "ConfigError",
    "EvalCounter",
    "EvaluationError",
    "IterationRecord",
    "NonlinearProblem",
    "RuleKind",
    "SolverConfig",
    "SolverReport",
    "SolverStatus",
    "SpecresError",
    "TrustRegionConfig",
    "evaluate",
    "fd_jacobian",
    "rule_from_name",
    "solve",
    "solve_newton_tr",
    "solve_sequence",
]
