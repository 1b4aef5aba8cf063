"""Fiscal rules, debt dynamics and a finite-horizon no-Ponzi check.

The surplus rule is ``s_t = phi s_{t-1} + rho b_{t-1} + mu_t`` and debt
follows ``b_t = (1 + r_t) / (1 + g_t) * (b_{t-1} - s_t)``, all in percent of
GDP. Discounted debt uses a caller-supplied deterministic discount sequence,
by default the natural factor (1 + g_t) / (1 + r_t).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonZero, NonPositiveGrossRate, NonStationaryInertia, ValidationError

DEFAULT_TOLERANCE = 1e-6
DEFAULT_TAIL = 0.10
DEFAULT_MU_CAP = 100.0


class OverAdjustmentWarning(UserWarning):
    """Long-run surplus response to debt is at or above one."""


class UnboundedDeterminantWarning(UserWarning):
    """Non-debt determinants exceed the configured bound."""


class Verdict(str, enum.Enum):
    SUSTAINABLE = "Sustainable"
    PONZI_VIOLATION = "PonziViolation"
    INCONCLUSIVE = "Inconclusive"


def long_run_response(phi: float, rho: float) -> float:
    """Permanent surplus adjustment per unit of debt, rho / (1 - phi)."""
    if not phi < 1:
        raise NonStationaryInertia(f"inertia phi={phi} must be below 1")
    lr = rho / (1.0 - phi)
    if lr >= 1:
        warnings.warn(f"long-run response {lr:.4g} >= 1 (over-adjustment)", OverAdjustmentWarning,
                      stacklevel=2)
    return lr


def ponzi_decay_factor(phi: float, rho: float) -> float:
    """Factor 1 - rho / (1 - phi) by which debt growth falls short of a Ponzi scheme."""
    return 1.0 - long_run_response(phi, rho)


@dataclass(frozen=True)
class FiscalRule:
    phi: float
    rho: float
    mu: float | tuple[float, ...] = 0.0
    mu_cap: float = DEFAULT_MU_CAP

    def __post_init__(self):
        if not self.phi < 1:
            raise NonStationaryInertia(f"inertia phi={self.phi} must be below 1")
        if self.phi < 0:
            raise ValidationError(f"inertia phi={self.phi} must be nonnegative")
        if not math.isfinite(self.rho):
            raise ValidationError("rho must be finite")
        if not np.isscalar(self.mu):
            object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        if np.max(np.abs(self.mu)) > self.mu_cap:
            warnings.warn(f"|mu| exceeds {self.mu_cap}; the rule assumes bounded non-debt determinants",
                          UnboundedDeterminantWarning, stacklevel=2)

    @property
    def long_run(self) -> float:
        return long_run_response(self.phi, self.rho)

    def mu_path(self, horizon: int) -> np.ndarray:
        return _path(self.mu, horizon, "mu")


def _path(value, horizon: int, name: str) -> np.ndarray:
    if np.isscalar(value):
        return np.full(horizon, float(value))
    arr = np.asarray(value, dtype=float)
    if arr.size < horizon:
        raise ValidationError(f"{name} series has {arr.size} values, horizon is {horizon}")
    return arr[:horizon]


@dataclass(frozen=True)
class EconomyPath:
    """Interest rate ``r`` and growth rate ``g`` per period (0.03 = 3%), constants or series."""

    r: float | tuple[float, ...]
    g: float | tuple[float, ...]
    discount: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in ("r", "g"):
            v = getattr(self, name)
            if not np.isscalar(v):
                object.__setattr__(self, name, tuple(float(x) for x in v))
            if np.min(1.0 + np.asarray(getattr(self, name), dtype=float)) <= 0:
                raise NonPositiveGrossRate(f"gross rate 1 + {name} must be positive")
        if self.discount is not None:
            object.__setattr__(self, "discount", tuple(float(x) for x in self.discount))

    def paths(self, horizon: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        r = _path(self.r, horizon, "r")
        g = _path(self.g, horizon, "g")
        if self.discount is None:
            d = (1.0 + g) / (1.0 + r)
        else:
            d = _path(self.discount, horizon, "discount")
        return r, g, d


@dataclass(frozen=True)
class DebtPathResult:
    """Paths for t = 1..horizon; ``b0`` and ``s0`` are the initial conditions."""

    b: np.ndarray
    s: np.ndarray
    discounted_b: np.ndarray
    b0: float
    s0: float
    r: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    verdict: Verdict | None = None

    @property
    def horizon(self) -> int:
        return self.b.size


def simulate_debt_path(rule: FiscalRule, economy: EconomyPath, b0: float, s0: float,
                       horizon: int, tolerance: float = DEFAULT_TOLERANCE) -> DebtPathResult:
    if horizon < 1:
        raise HorizonZero("horizon must be at least 1")
    r, g, disc = economy.paths(horizon)
    mu = rule.mu_path(horizon)
    growth = (1.0 + r) / (1.0 + g)
    b = np.empty(horizon)
    s = np.empty(horizon)
    b_prev, s_prev = float(b0), float(s0)
    for t in range(horizon):
        s[t] = rule.phi * s_prev + rule.rho * b_prev + mu[t]
        b[t] = growth[t] * (b_prev - s[t])
        b_prev, s_prev = b[t], s[t]
    discounted = b * np.cumprod(disc)
    result = DebtPathResult(b=b, s=s, discounted_b=discounted, b0=float(b0), s0=float(s0), r=r, g=g)
    return DebtPathResult(**{**result.__dict__,
                             "verdict": classify_sustainability(result, tolerance)})


def classify_sustainability(result: DebtPathResult, tolerance: float = DEFAULT_TOLERANCE,
                            tail: float = DEFAULT_TAIL) -> Verdict:
    """Judge the transversality condition on the last ``tail`` share of the horizon.

    Sustainable: every tail value is below ``tolerance * |b0|`` and the
    second half of the tail never exceeds the first half's peak.
    PonziViolation: the tail stays at or above that level and does not fall.
    Otherwise Inconclusive; a longer horizon usually settles it.
    """
    n_tail = int(math.floor(tail * result.horizon))
    if n_tail < 2:
        return Verdict.INCONCLUSIVE
    d = np.abs(result.discounted_b[-n_tail:])
    scale = tolerance * abs(result.b0)
    half = n_tail // 2
    if d.max() < scale and d[half:].max() <= d[:half].max():
        return Verdict.SUSTAINABLE
    if d.min() >= scale and np.all(np.diff(d) >= -1e-9 * d[:-1]):
        return Verdict.PONZI_VIOLATION
    return Verdict.INCONCLUSIVE
