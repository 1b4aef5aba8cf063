"""Hodrick-Prescott trend extraction and percent gaps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .errors import NonFiniteInput, SeriesTooShort, ValidationError, ZeroTrend
from .panel import PanelDataset

DEFAULT_LAMBDA = 100.0


@dataclass(frozen=True)
class FilterConfig:
    """``lam`` is the smoothing penalty (100 for annual data).

    With ``log=True`` the filter runs on log levels; trend and cycle are then
    in log units and the gap is ``100 * cycle`` (log points).
    """

    lam: float = DEFAULT_LAMBDA
    log: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValidationError(f"smoothing parameter must be finite and >= 0, got {self.lam}")


@dataclass(frozen=True)
class TrendCycle:
    trend: np.ndarray
    cycle: np.ndarray
    gap_percent: np.ndarray


def second_difference_gram(n: int) -> np.ndarray:
    """Upper banded storage (3 x (n-2)) of K K', K the (n-2) x n second-difference operator."""
    m = n - 2
    ab = np.zeros((3, m))
    ab[0, 2:] = 1.0
    ab[1, 1:] = -4.0
    ab[2, :] = 6.0
    return ab


def hp_trend(series, config: FilterConfig = FilterConfig()) -> TrendCycle:
    """Solve ``(I + lam K'K) trend = y`` with a banded Cholesky factorisation.

    The system is solved in its dual form ``(I / lam + K K') w = K y`` with
    ``cycle = K' w``. That matrix stays well conditioned for any lam > 0, so
    very large smoothing parameters still give the least-squares line, and
    the cycle is orthogonal to constants and linear trends by construction.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValidationError("hp_trend expects a one-dimensional series")
    if y.size < 4:
        raise SeriesTooShort(f"HP filter needs at least 4 observations, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise NonFiniteInput("series contains non-finite values")
    if config.log:
        if np.any(y <= 0):
            raise NonFiniteInput("log filtering needs strictly positive levels")
        y = np.log(y)

    if config.lam == 0:
        trend = y.copy()
        cycle = np.zeros_like(y)
    else:
        ab = second_difference_gram(y.size)
        ab[2] += 1.0 / config.lam
        w = solveh_banded(ab, y[:-2] - 2.0 * y[1:-1] + y[2:], lower=False, check_finite=False)
        cycle = np.convolve(w, (1.0, -2.0, 1.0))
        trend = y - cycle

    if config.log:
        gap = 100.0 * cycle
    else:
        gap = np.full_like(y, np.nan)
        ok = trend != 0
        gap[ok] = 100.0 * cycle[ok] / trend[ok]
    return TrendCycle(trend=trend, cycle=cycle, gap_percent=gap)


def detrend_panel(panel: PanelDataset, var: str, config: FilterConfig = FilterConfig(),
                  name: str | None = None) -> PanelDataset:
    """Return a copy of ``panel`` with a ``<var>_gap`` variable of per-unit percent gaps."""
    levels = panel[var]
    gaps = np.empty_like(levels)
    for i, unit in enumerate(panel.unit_ids):
        try:
            tc = hp_trend(levels[i], config)
        except (SeriesTooShort, NonFiniteInput) as exc:
            raise type(exc)(f"unit {unit}: {exc}") from exc
        if np.any(np.isnan(tc.gap_percent)):
            bad = [panel.years[t] for t in np.flatnonzero(np.isnan(tc.gap_percent))]
            raise ZeroTrend(f"unit {unit}: trend of {var} is zero in {bad}; percent gap undefined")
        gaps[i] = tc.gap_percent
    return panel.with_variable(name or f"{var}_gap", gaps)
