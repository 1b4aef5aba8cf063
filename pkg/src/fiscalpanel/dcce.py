"""Dynamic common-correlated-effects mean-group estimation.

Each unit regression is

    s_t = const + phi s_{t-1} + regressors + psi D_t + sum_{m=0..M} delta_m' w_{t-m} + e_t

where ``w_t`` stacks the cross-sectional averages of the dependent variable
and of every regressor's underlying series, and ``D_t`` is a step dummy that
switches on at the break year. Unit slopes are averaged across units.
"""

from __future__ import annotations

import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .errors import (
    InconsistentCoefficientSets,
    InsufficientObservations,
    RankDeficient,
    TooFewUnits,
    UnitEstimationFailed,
    ValidationError,
    ZeroVariance,
)
from .linalg import OLSFit, ols
from .panel import GroupSplit, PanelDataset, cross_sectional_average

log = logging.getLogger(__name__)

AUTO = "auto"
CONST = "const"
CSA_PREFIX = "csa."

_LAG = re.compile(r"^L(\d*)\.(.+)$")


def parse_term(term: str) -> tuple[str, int]:
    """``"L.debt"`` -> ``("debt", 1)``, ``"L2.x"`` -> ``("x", 2)``, ``"x"`` -> ``("x", 0)``."""
    m = _LAG.match(term)
    if not m:
        return term, 0
    return m.group(2), int(m.group(1) or 1)


def lag_name(var: str, lag: int) -> str:
    if lag == 0:
        return var
    return f"L.{var}" if lag == 1 else f"L{lag}.{var}"


def icbrt(n: int) -> int:
    """Integer cube root, floor."""
    m = int(round(n ** (1.0 / 3.0)))
    while m ** 3 > n:
        m -= 1
    while (m + 1) ** 3 <= n:
        m += 1
    return m


@dataclass(frozen=True)
class RegressionSpec:
    dependent: str
    regressors: tuple[str, ...]
    lag_dependent: int = 1
    dummy_year: int | None = None
    csa_lags: int | str = AUTO
    group: GroupSplit | None = None
    # "group": averages over the estimation subsample; "full": over the whole panel
    csa_scope: str = "group"
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        if self.lag_dependent < 0:
            raise ValidationError("lag_dependent must be >= 0")
        if self.csa_lags != AUTO and (not isinstance(self.csa_lags, int) or self.csa_lags < 0):
            raise ValidationError(f"csa_lags must be a nonnegative integer or {AUTO!r}")
        if self.csa_scope not in ("group", "full"):
            raise ValidationError("csa_scope must be 'group' or 'full'")
        bases = [parse_term(r) for r in self.regressors]
        if any(v == self.dependent and lag == 0 for v, lag in bases):
            raise ValidationError("dependent variable cannot also be a contemporaneous regressor")
        if len(set(self.regressors)) != len(self.regressors):
            raise ValidationError("duplicate regressors")

    @property
    def base_lag(self) -> int:
        """Largest lag needed by the dependent and regressor columns."""
        return max([self.lag_dependent] + [parse_term(r)[1] for r in self.regressors])

    def resolved_csa_lags(self, n_years: int) -> int:
        if self.csa_lags == AUTO:
            return icbrt(n_years - self.base_lag)
        return int(self.csa_lags)

    def resolve(self, n_years: int) -> "RegressionSpec":
        return replace(self, csa_lags=self.resolved_csa_lags(n_years))

    @property
    def csa_variables(self) -> tuple[str, ...]:
        seen = [self.dependent]
        for r in self.regressors:
            v = parse_term(r)[0]
            if v not in seen:
                seen.append(v)
        return tuple(seen)

    @property
    def dummy_name(self) -> str | None:
        return None if self.dummy_year is None else f"D{self.dummy_year}"

    def variables(self) -> set[str]:
        return {self.dependent, *(parse_term(r)[0] for r in self.regressors)}

    def check(self, panel: PanelDataset) -> None:
        for v in sorted(self.variables()):
            panel[v]
        if self.group is not None:
            self.group.check_within(panel)
        if self.dummy_year is not None and not (panel.years[0] < self.dummy_year <= panel.years[-1]):
            raise ValidationError(
                f"break year {self.dummy_year} outside {panel.years[0] + 1}-{panel.years[-1]}")

    def main_columns(self) -> tuple[str, ...]:
        cols = [CONST] + [lag_name(self.dependent, p) for p in range(1, self.lag_dependent + 1)]
        cols += list(self.regressors)
        if self.dummy_name:
            cols.append(self.dummy_name)
        return tuple(cols)

    def csa_columns(self, csa_lags: int) -> tuple[str, ...]:
        return tuple(f"{CSA_PREFIX}{v}.L{m}" for v in self.csa_variables for m in range(csa_lags + 1))


@dataclass(frozen=True)
class UnitEstimate:
    unit: str
    coefficients: dict[str, float]
    residuals: np.ndarray = field(repr=False)
    dof: int
    dropped: tuple[str, ...] = ()
    years: tuple[int, ...] = ()


@dataclass(frozen=True)
class MeanGroupResult:
    units: tuple[UnitEstimate, ...]
    mg_coefficients: dict[str, float]
    mg_se: dict[str, float]
    bias_corrected: bool = False
    label: str = ""

    @property
    def n_units(self) -> int:
        return len(self.units)

    def zvalue(self, name: str) -> float:
        se = self.mg_se[name]
        return float("inf") if se == 0 else self.mg_coefficients[name] / se

    def pvalue(self, name: str) -> float:
        """Two-sided normal p-value of the mean-group coefficient."""
        z = self.zvalue(name)
        return float(2.0 * norm.sf(abs(z)))


def _csa_panel(panel: PanelDataset, spec: RegressionSpec) -> dict[str, np.ndarray]:
    members = None
    if spec.csa_scope == "group" and spec.group is not None:
        members = spec.group.members
    return {v: cross_sectional_average(panel, v, members) for v in spec.csa_variables}


def build_design(panel: PanelDataset, spec: RegressionSpec, unit: str,
                 csa: dict[str, np.ndarray] | None = None
                 ) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Response, design matrix and column names for one unit.

    Column order: intercept, lagged dependent, regressors, dummy, then the
    cross-sectional averages of the dependent and each regressor series at
    lags 0..csa_lags. Rows are the years left after lagging.
    """
    spec.check(panel)
    T = panel.n_years
    m = spec.resolved_csa_lags(T)
    p = max(spec.base_lag, m)
    main, extra = spec.main_columns(), spec.csa_columns(m)
    n = T - p
    if n <= len(main) + len(extra):
        raise InsufficientObservations(
            f"{n} usable years for {len(main) + len(extra)} columns"
            f" ({T} years, {m} cross-sectional-average lags); reduce csa_lags or regressors")
    if csa is None:
        csa = _csa_panel(panel, spec)

    i = panel.unit_index(unit)
    rows = slice(p, T)

    def lagged(x, lag):
        return x[p - lag:T - lag]

    y = panel[spec.dependent][i, rows]
    cols = [np.ones(n)]
    cols += [lagged(panel[spec.dependent][i], q) for q in range(1, spec.lag_dependent + 1)]
    for r in spec.regressors:
        var, lag = parse_term(r)
        cols.append(lagged(panel[var][i], lag))
    if spec.dummy_year is not None:
        cols.append((np.asarray(panel.years[p:]) >= spec.dummy_year).astype(float))
    for v in spec.csa_variables:
        cols += [lagged(csa[v], q) for q in range(m + 1)]
    return y, np.column_stack(cols), main + extra


def estimate_unit(panel: PanelDataset, spec: RegressionSpec, unit: str,
                  csa: dict[str, np.ndarray] | None = None) -> UnitEstimate:
    """Fit one unit's regression.

    Collinear cross-sectional-average columns are dropped (latest first) with
    a warning; collinearity among the unit's own columns raises RankDeficient.
    """
    members = spec.group.members if (spec.group is not None and spec.csa_scope == "group") \
        else panel.unit_ids
    if len(members) < 2:
        raise RankDeficient(
            "cross-sectional averages over a single-unit group duplicate the unit's own series")
    y, X, names = build_design(panel, spec, unit, csa)
    if np.ptp(y) == 0:
        raise RankDeficient(f"unit {unit}: dependent variable {spec.dependent} has zero variance",
                            [spec.dependent])
    droppable = [c for c in names if c.startswith(CSA_PREFIX)]
    try:
        fit: OLSFit = ols(y, X, names, droppable=droppable)
    except RankDeficient as exc:
        raise RankDeficient(f"unit {unit}: {exc}", exc.columns) from exc
    if fit.dropped:
        log.warning("unit %s: dropped collinear columns %s", unit, ", ".join(fit.dropped))
    T = panel.n_years
    return UnitEstimate(unit=unit, coefficients=fit.as_dict(), residuals=fit.residuals,
                        dof=fit.dof, dropped=fit.dropped,
                        years=panel.years[T - len(y):])


def mean_group(units: Sequence[UnitEstimate], label: str = "",
               bias_corrected: bool = False) -> MeanGroupResult:
    """Average unit slopes; nonparametric standard error sqrt(sum (b_i - b)^2 / (N (N-1)))."""
    units = tuple(units)
    if len(units) < 2:
        raise TooFewUnits(f"mean-group estimation needs at least 2 units, got {len(units)}")
    names = [k for k in units[0].coefficients if not k.startswith(CSA_PREFIX)]
    for u in units[1:]:
        other = [k for k in u.coefficients if not k.startswith(CSA_PREFIX)]
        if set(other) != set(names):
            raise InconsistentCoefficientSets(
                f"unit {u.unit} has coefficients {sorted(other)}, unit {units[0].unit} has {sorted(names)}")
    theta = np.array([[u.coefficients[k] for k in names] for u in units])
    N = theta.shape[0]
    # correctly rounded sums make the average independent of unit order
    mg = np.array([math.fsum(col) / N for col in theta.T])
    # deviations taken about the first unit so identical columns give exactly zero
    d = theta - theta[0]
    ss = ((d - d.mean(axis=0)) ** 2).sum(axis=0)
    se = np.sqrt(ss / (N * (N - 1)))
    return MeanGroupResult(units=units,
                           mg_coefficients={k: float(v) for k, v in zip(names, mg)},
                           mg_se={k: float(v) for k, v in zip(names, se)},
                           bias_corrected=bias_corrected, label=label)


@dataclass(frozen=True)
class EstimationOptions:
    jackknife: bool = False
    workers: int = 1


def _units_of(panel: PanelDataset, spec: RegressionSpec) -> tuple[str, ...]:
    return spec.group.members if spec.group is not None else panel.unit_ids


def _fit_all(panel: PanelDataset, spec: RegressionSpec, workers: int) -> list[UnitEstimate]:
    csa = _csa_panel(panel, spec)
    units = _units_of(panel, spec)

    def one(u):
        try:
            return estimate_unit(panel, spec, u, csa)
        except (RankDeficient, ZeroVariance) as exc:
            return exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, units))
    else:
        out = [one(u) for u in units]
    failures = {u: r for u, r in zip(units, out) if isinstance(r, Exception)}
    if failures:
        raise UnitEstimationFailed(failures)
    return out


def jackknife_correct(panel: PanelDataset, spec: RegressionSpec,
                      workers: int = 1) -> MeanGroupResult:
    """Half-panel jackknife: ``2 b_full - (b_first + b_second) / 2`` per unit, then averaged.

    The split is at floor(T/2); lags and cross-sectional averages are rebuilt
    inside each half.
    """
    spec.check(panel)
    spec = spec.resolve(panel.n_years)
    T = panel.n_years
    h = T // 2
    first = panel.window(panel.years[0], panel.years[h - 1])
    second = panel.window(panel.years[h], panel.years[-1])
    for half in (first, second):
        needed = len(spec.main_columns()) + len(spec.csa_columns(int(spec.csa_lags)))
        usable = half.n_years - max(spec.base_lag, int(spec.csa_lags))
        if usable <= needed:
            raise InsufficientObservations(
                f"half-panel of {half.n_years} years leaves {usable} usable rows for {needed} columns;"
                f" reduce csa_lags (currently {spec.csa_lags}) to make the jackknife feasible")

    def half_spec(half):
        # a break year outside a half makes the dummy constant there; drop it
        if spec.dummy_year is not None and not (half.years[0] < spec.dummy_year <= half.years[-1]):
            return replace(spec, dummy_year=None)
        return spec

    full = _fit_all(panel, spec, workers)
    a = _fit_all(first, half_spec(first), workers)
    b = _fit_all(second, half_spec(second), workers)

    corrected = []
    for uf, ua, ub in zip(full, a, b):
        coefs = {}
        for k, v in uf.coefficients.items():
            if k.startswith(CSA_PREFIX):
                continue
            if k in ua.coefficients and k in ub.coefficients:
                coefs[k] = 2.0 * v - 0.5 * (ua.coefficients[k] + ub.coefficients[k])
            else:
                coefs[k] = v
        corrected.append(replace(uf, coefficients=coefs))
    return mean_group(corrected, label=spec.label, bias_corrected=True)


def estimate_dcce(panel: PanelDataset, spec: RegressionSpec,
                  options: EstimationOptions = EstimationOptions()) -> MeanGroupResult:
    """Fit every unit in the spec's group and aggregate.

    Any unit failure aborts the run with :class:`UnitEstimationFailed`
    listing all failed units.
    """
    spec.check(panel)
    spec = spec.resolve(panel.n_years)
    if options.jackknife:
        return jackknife_correct(panel, spec, options.workers)
    return mean_group(_fit_all(panel, spec, options.workers), label=spec.label)
