"""Validated solver configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import voluptuous as vol

from .const import (
    CONF_ACCEPT_RATIO,
    CONF_BETA0,
    CONF_BETA_MAX,
    CONF_BETA_MIN,
    CONF_ETA_OFFSET,
    CONF_ETA_RATIO,
    CONF_EXPAND_FACTOR,
    CONF_EXPAND_THRESHOLD,
    CONF_FD_STEP,
    CONF_INITIAL_RADIUS,
    CONF_MAX_BACKTRACKS,
    CONF_MAX_FEVALS,
    CONF_MAX_ITERS,
    CONF_MAX_RADIUS,
    CONF_RHO,
    CONF_RULE,
    CONF_SHRINK_FACTOR,
    CONF_SHRINK_THRESHOLD,
    CONF_SIGMA,
    CONF_STAGNATION_WINDOW,
    CONF_TOL,
    DEFAULT_ACCEPT_RATIO,
    DEFAULT_BETA0,
    DEFAULT_BETA_MAX,
    DEFAULT_BETA_MIN,
    DEFAULT_ETA_OFFSET,
    DEFAULT_ETA_RATIO,
    DEFAULT_EXPAND_FACTOR,
    DEFAULT_EXPAND_THRESHOLD,
    DEFAULT_INITIAL_RADIUS,
    DEFAULT_MAX_BACKTRACKS,
    DEFAULT_MAX_FEVALS,
    DEFAULT_MAX_ITERS,
    DEFAULT_MAX_RADIUS,
    DEFAULT_RHO,
    DEFAULT_SHRINK_FACTOR,
    DEFAULT_SHRINK_THRESHOLD,
    DEFAULT_SIGMA,
    DEFAULT_STAGNATION_WINDOW,
    DEFAULT_TOL,
    DEFAULT_TR_MAX_ITERS,
    RULE_DABBM,
)
from .problem import SpecresError
from .steplength import RuleKind, rule_from_name


class ConfigError(SpecresError):
    """Invalid solver configuration."""


def _rule(value: Any) -> RuleKind:
    if isinstance(value, RuleKind):
        return value
    try:
        return rule_from_name(str(value))
    except KeyError as err:
        raise vol.Invalid(str(err.args[0])) from err


_POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0.0, min_included=False))
_UNIT = vol.All(
    vol.Coerce(float),
    vol.Range(min=0.0, max=1.0, min_included=False, max_included=False),
)
_COUNT = vol.All(vol.Coerce(int), vol.Range(min=1))

SOLVER_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_RULE): _rule,
        vol.Optional(CONF_BETA_MIN): _POSITIVE,
        vol.Optional(CONF_BETA_MAX): _POSITIVE,
        vol.Optional(CONF_RHO): _UNIT,
        vol.Optional(CONF_SIGMA): _UNIT,
        vol.Optional(CONF_ETA_RATIO): _UNIT,
        vol.Optional(CONF_ETA_OFFSET): vol.All(vol.Coerce(float), vol.Range(min=0.0)),
        vol.Optional(CONF_MAX_ITERS): _COUNT,
        vol.Optional(CONF_MAX_FEVALS): _COUNT,
        vol.Optional(CONF_MAX_BACKTRACKS): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(CONF_STAGNATION_WINDOW): _COUNT,
        vol.Optional(CONF_TOL): vol.All(vol.Coerce(float), vol.Range(min=0.0)),
        vol.Optional(CONF_BETA0): vol.All(vol.Coerce(float), vol.NotIn([0.0])),
    }
)

TRUST_REGION_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_INITIAL_RADIUS): _POSITIVE,
        vol.Optional(CONF_MAX_RADIUS): _POSITIVE,
        vol.Optional(CONF_SHRINK_THRESHOLD): _UNIT,
        vol.Optional(CONF_EXPAND_THRESHOLD): _UNIT,
        vol.Optional(CONF_SHRINK_FACTOR): _UNIT,
        vol.Optional(CONF_EXPAND_FACTOR): vol.All(
            vol.Coerce(float), vol.Range(min=1.0, min_included=False)
        ),
        vol.Optional(CONF_ACCEPT_RATIO): vol.All(
            vol.Coerce(float), vol.Range(min=0.0, max=1.0, max_included=False)
        ),
        vol.Optional(CONF_TOL): vol.All(vol.Coerce(float), vol.Range(min=0.0)),
        vol.Optional(CONF_MAX_ITERS): _COUNT,
        vol.Optional(CONF_FD_STEP): vol.Any(None, _POSITIVE),
    }
)


def _validate(schema: vol.Schema, data: dict[str, Any], what: str) -> dict[str, Any]:
    try:
        return dict(schema(data))
    except vol.Invalid as err:
        msg = f"Invalid {what} configuration: {err}"
        raise ConfigError(msg) from err


@dataclass(frozen=True)
class SolverConfig:
    """
    Parameters of the spectral residual solver.

    The nonmonotone allowance is ``eta_k = eta_ratio**k * (eta_offset +
    ||F_0||^2)``, a summable geometric sequence.
    """

    rule: RuleKind = field(default_factory=lambda: rule_from_name(RULE_DABBM))
    beta_min: float = DEFAULT_BETA_MIN
    beta_max: float = DEFAULT_BETA_MAX
    rho: float = DEFAULT_RHO
    sigma: float = DEFAULT_SIGMA
    eta_ratio: float = DEFAULT_ETA_RATIO
    eta_offset: float = DEFAULT_ETA_OFFSET
    max_iters: int = DEFAULT_MAX_ITERS
    max_fevals: int = DEFAULT_MAX_FEVALS
    max_backtracks: int = DEFAULT_MAX_BACKTRACKS
    stagnation_window: int = DEFAULT_STAGNATION_WINDOW
    tol: float = DEFAULT_TOL
    beta0: float = DEFAULT_BETA0

    def __post_init__(self) -> None:
        if not 0.0 < self.beta_min < self.beta_max:
            msg = "beta_min and beta_max must satisfy 0 < beta_min < beta_max"
            raise ConfigError(msg)
        for name in (CONF_RHO, CONF_SIGMA, CONF_ETA_RATIO):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                msg = f"{name} must lie in (0, 1), got {value}"
                raise ConfigError(msg)
        if self.beta0 == 0.0:
            msg = "beta0 must be nonzero"
            raise ConfigError(msg)

    def eta(self, k: int, f0_norm: float) -> float:
        """Return the nonmonotone allowance eta_k."""
        return self.eta_ratio**k * (self.eta_offset + f0_norm**2)

    def with_rule(self, rule: RuleKind | str) -> SolverConfig:
        """Return a copy using another steplength rule."""
        kind = rule if isinstance(rule, RuleKind) else rule_from_name(rule)
        return replace(self, rule=kind)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SolverConfig:
        """Build a config from a user mapping, validating every key."""
        values = _validate(SOLVER_SCHEMA, data, "solver")
        return cls(**values)


@dataclass(frozen=True)
class TrustRegionConfig:
    """Parameters of the Newton trust-region baseline."""

    initial_radius: float = DEFAULT_INITIAL_RADIUS
    max_radius: float = DEFAULT_MAX_RADIUS
    shrink_threshold: float = DEFAULT_SHRINK_THRESHOLD
    expand_threshold: float = DEFAULT_EXPAND_THRESHOLD
    shrink_factor: float = DEFAULT_SHRINK_FACTOR
    expand_factor: float = DEFAULT_EXPAND_FACTOR
    accept_ratio: float = DEFAULT_ACCEPT_RATIO
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_TR_MAX_ITERS
    fd_step: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.shrink_factor < 1.0 < self.expand_factor:
            msg = "Trust-region factors must satisfy 0 < shrink < 1 < expand"
            raise ConfigError(msg)
        if not self.accept_ratio <= self.shrink_threshold < self.expand_threshold:
            msg = "Trust-region thresholds must satisfy accept <= shrink < expand"
            raise ConfigError(msg)
        if not 0.0 < self.initial_radius <= self.max_radius:
            msg = "Trust-region radius must satisfy 0 < initial <= max"
            raise ConfigError(msg)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TrustRegionConfig:
        """Build a config from a user mapping, validating every key."""
        values = _validate(TRUST_REGION_SCHEMA, data, "trust-region")
        return cls(**values)
