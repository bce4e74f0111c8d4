"""
Spectral steplength rules.

Given the last step ``p = x_k - x_{k-1}`` and residual difference
``y = F_k - F_{k-1}`` two Barzilai-Borwein type steplengths are available:

    beta1 = p'p / p'y        beta2 = p'y / y'y

The rules below decide which one (or which thresholded / remembered
variant) becomes the next steplength.  Thresholding keeps the sign of the
raw value so negative spectral information survives; the solver tries both
directions anyway.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .const import (
    RULE_ABB01,
    RULE_ABB08,
    RULE_ABBM01,
    RULE_ABBM08,
    RULE_ALT,
    RULE_BB1,
    RULE_BB2,
    RULE_DABBM,
)
from .problem import SpecresError, Vector

_LOGGER = logging.getLogger(__name__)

KIND_BB1 = "bb1"
KIND_BB2 = "bb2"
KIND_ALT = "alt"
KIND_ABB = "abb"
KIND_ABBM = "abbm"
KIND_DABBM = "dabbm"

# Branch labels reported in StepChoice
BRANCH_RAW = "raw"
BRANCH_CROSS = "cross"
BRANCH_THRESHOLD = "threshold"
BRANCH_MEMORY = "memory"
BRANCH_FALLBACK = "fallback"


class ZeroSteplengthError(SpecresError):
    """A zero steplength cannot be thresholded."""


@dataclass(frozen=True)
class RuleKind:
    """A steplength rule with its parameters."""

    name: str
    kind: str
    tau: float | None = None
    m: int = 0
    w: int = 0

    def __post_init__(self) -> None:
        if self.kind in (KIND_ABB, KIND_ABBM, KIND_DABBM):
            if self.tau is None or not 0.0 < self.tau < 1.0:
                msg = f"Rule {self.name}: tau must lie in (0, 1), got {self.tau}"
                raise ValueError(msg)
        if self.m < 0 or self.w < 0:
            msg = f"Rule {self.name}: m and w must be nonnegative"
            raise ValueError(msg)


RULES: dict[str, RuleKind] = {
    RULE_BB1: RuleKind(RULE_BB1, KIND_BB1),
    RULE_BB2: RuleKind(RULE_BB2, KIND_BB2),
    RULE_ALT: RuleKind(RULE_ALT, KIND_ALT),
    RULE_ABB01: RuleKind(RULE_ABB01, KIND_ABB, tau=0.1),
    RULE_ABB08: RuleKind(RULE_ABB08, KIND_ABB, tau=0.8),
    RULE_ABBM01: RuleKind(RULE_ABBM01, KIND_ABBM, tau=0.1, m=5),
    RULE_ABBM08: RuleKind(RULE_ABBM08, KIND_ABBM, tau=0.8, m=5),
    RULE_DABBM: RuleKind(RULE_DABBM, KIND_DABBM, tau=0.8, m=5, w=20),
}


def rule_from_name(name: str) -> RuleKind:
    """Look up a rule by its label, ignoring case."""
    for label, rule in RULES.items():
        if label.lower() == name.lower():
            return rule
    msg = f"Unknown steplength rule {name!r}; expected one of {', '.join(RULES)}"
    raise KeyError(msg)


# ---------------------------------------------------------------------------
# Raw steplengths and thresholding
# ---------------------------------------------------------------------------


def raw_beta1(p: Vector, y: Vector) -> float | None:
    """Return p'p / p'y, or None when p'y = 0 or the quotient overflows."""
    pty = float(np.dot(p, y))
    if pty == 0.0:
        return None
    value = float(np.dot(p, p)) / pty
    return value if math.isfinite(value) else None


def raw_beta2(p: Vector, y: Vector) -> float | None:
    """Return p'y / y'y, or None when y = 0."""
    yty = float(np.dot(y, y))
    if yty == 0.0:
        return None
    value = float(np.dot(p, y)) / yty
    return value if math.isfinite(value) else None


def threshold(beta: float, beta_min: float, beta_max: float) -> float:
    """Project |beta| onto [beta_min, beta_max], keeping the sign."""
    if beta == 0.0:
        msg = "Cannot threshold a zero steplength"
        raise ZeroSteplengthError(msg)
    if math.isnan(beta):
        msg = f"Cannot threshold non-finite steplength {beta}"
        raise ValueError(msg)
    return math.copysign(min(beta_max, max(beta_min, abs(beta))), beta)


def dynamic_tau(tau: float, f_norm: float, backtracks: int) -> float:
    """Return min(tau, ||F_k|| ** (1 / (2 + bt^2)))."""
    return min(tau, f_norm ** (1.0 / (2.0 + backtracks**2)))


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------


@dataclass
class SteplengthState:
    """History feeding the steplength rules of one solver run."""

    beta_min: float
    beta_max: float
    m: int = 0
    w: int = 0
    k: int = 0
    p_prev: Vector | None = None
    y_prev: Vector | None = None
    current_f_norm: float = math.inf
    last_beta: float = 1.0
    fallbacks: int = 0
    tilde_beta2_history: deque[float] = field(init=False)
    backtrack_history: deque[int] = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.beta_min < self.beta_max:
            msg = "Steplength bounds must satisfy 0 < beta_min < beta_max"
            raise ValueError(msg)
        self.tilde_beta2_history = deque(maxlen=self.m + 1)
        self.backtrack_history = deque(maxlen=self.w + 1)

    @classmethod
    def for_rule(
        cls, rule: RuleKind, beta_min: float, beta_max: float, beta0: float
    ) -> SteplengthState:
        """Create an empty state sized for ``rule``."""
        return cls(
            beta_min=beta_min,
            beta_max=beta_max,
            m=rule.m,
            w=rule.w,
            last_beta=threshold(beta0, beta_min, beta_max),
        )

    def record_iteration(
        self, p: Vector, y: Vector, backtracks: int, f_norm: float, beta: float
    ) -> None:
        """Push a completed iteration into the state."""
        self.p_prev = p
        self.y_prev = y
        self.backtrack_history.append(backtracks)
        self.current_f_norm = f_norm
        self.last_beta = beta
        self.k += 1

    def in_range(self, beta: float | None) -> bool:
        """Return True if beta is defined and beta_min <= |beta| <= beta_max."""
        return beta is not None and self.beta_min <= abs(beta) <= self.beta_max

    def clamp(self, beta: float) -> float:
        """Sign-preserving thresholding with this state's bounds."""
        return threshold(beta, self.beta_min, self.beta_max)


@dataclass(frozen=True)
class StepChoice:
    """Selected steplength plus the branch of the rule that produced it."""

    beta: float
    branch: str
    beta1: float | None = None
    beta2: float | None = None

    @property
    def fallback(self) -> bool:
        """Return True if the previous steplength was reused."""
        return self.branch == BRANCH_FALLBACK


# ---------------------------------------------------------------------------
# Rule evaluation
# ---------------------------------------------------------------------------


def _pick_single(state: SteplengthState, preferred: float) -> tuple[float, str]:
    """BB1 / BB2: the raw value if in range, otherwise its threshold."""
    if state.in_range(preferred):
        return preferred, BRANCH_RAW
    return state.clamp(preferred), BRANCH_THRESHOLD


def _pick_alt(state: SteplengthState, b1: float, b2: float) -> tuple[float, str]:
    odd = state.k % 2 == 1
    alt = b1 if odd else b2
    if state.in_range(alt):
        return alt, BRANCH_RAW
    if not odd and state.in_range(b1) and not state.in_range(b2):
        return b1, BRANCH_CROSS
    if odd and state.in_range(b2) and not state.in_range(b1):
        return b2, BRANCH_CROSS
    return state.clamp(alt), BRANCH_THRESHOLD


def _pick_abb(
    state: SteplengthState,
    b1: float,
    b2: float,
    tau: float,
    memory: float | None,
) -> tuple[float, str]:
    if state.in_range(b1) and state.in_range(b2):
        xi1, xi2, branch = b1, b2, BRANCH_RAW
    elif state.in_range(b1):
        return b1, BRANCH_CROSS
    elif state.in_range(b2):
        return b2, BRANCH_CROSS
    else:
        xi1, xi2, branch = state.clamp(b1), state.clamp(b2), BRANCH_THRESHOLD

    # Ratio is positive: both steplengths share a sign whenever p'y != 0
    if xi2 / xi1 < tau:
        if memory is None:
            return xi2, branch
        return memory, BRANCH_MEMORY
    return xi1, branch


def choose_beta(rule: RuleKind, state: SteplengthState) -> StepChoice:
    """
    Select the next steplength and report which branch fired.

    Falls back to the previous steplength when p'y = 0, in which case
    neither raw steplength carries usable information.
    """
    if state.p_prev is None or state.y_prev is None or state.k < 1:
        msg = "select_beta needs a completed iteration in the state"
        raise ValueError(msg)

    b1 = raw_beta1(state.p_prev, state.y_prev)
    b2 = raw_beta2(state.p_prev, state.y_prev)
    if b2 is None or b2 == 0.0:
        state.fallbacks += 1
        _LOGGER.warning(
            "Steplength undefined at k=%d (p'y = 0), reusing beta=%.6g",
            state.k,
            state.last_beta,
        )
        return StepChoice(state.clamp(state.last_beta), BRANCH_FALLBACK, b1, b2)
    if b1 is None:
        # p'p / p'y overflowed with p'y != 0: beyond beta_max, sign of p'y
        b1 = math.copysign(math.inf, b2)

    state.tilde_beta2_history.append(state.clamp(b2))

    if rule.kind == KIND_BB1:
        beta, branch = _pick_single(state, b1)
    elif rule.kind == KIND_BB2:
        beta, branch = _pick_single(state, b2)
    elif rule.kind == KIND_ALT:
        beta, branch = _pick_alt(state, b1, b2)
    elif rule.kind == KIND_ABB:
        assert rule.tau is not None
        beta, branch = _pick_abb(state, b1, b2, rule.tau, None)
    else:
        assert rule.tau is not None
        memory = min(state.tilde_beta2_history, key=abs)
        tau = rule.tau
        if rule.kind == KIND_DABBM:
            bt = max(state.backtrack_history, default=0)
            tau = dynamic_tau(rule.tau, state.current_f_norm, bt)
        beta, branch = _pick_abb(state, b1, b2, tau, memory)

    _LOGGER.debug(
        "k=%d rule=%s beta1=%.6g beta2=%.6g -> beta=%.6g (%s)",
        state.k,
        rule.name,
        b1,
        b2,
        beta,
        branch,
    )
    return StepChoice(beta, branch, b1, b2)


def select_beta(rule: RuleKind, state: SteplengthState) -> float:
    """Return the next steplength for ``rule``."""
    return choose_beta(rule, state).beta
