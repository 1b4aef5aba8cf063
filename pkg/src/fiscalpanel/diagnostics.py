"""Pre-estimation panel diagnostics.

Cross-sectional dependence (CD and its power-enhanced variant CD+),
cross-sectionally augmented unit-root tests (CADF, CIPS) and a HAC-robust
slope-homogeneity test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.stats import chi2, norm

from ._cips_tables import CIPS_INTERCEPT, LEVELS, N_GRID, T_GRID
from .dcce import RegressionSpec, parse_term
from .errors import (
    CollinearRegressors,
    InsufficientDegreesOfFreedom,
    RankDeficient,
    SeriesTooShort,
    TooFewUnits,
    ZeroVariance,
)
from .linalg import ols
from .panel import PanelDataset, cross_sectional_average
from .reference import cadf_null_draws, slope_unit_moments

CD_PLUS_THRESHOLD = 2.0


@dataclass(frozen=True)
class TestResult:
    """``p_value`` is None when no p-value is available (statistic-only mode)."""

    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: float
    p_value: float | None
    detail: dict[str, Any] = field(default_factory=dict)


# --- cross-sectional dependence --------------------------------------------

def pairwise_correlations(panel: PanelDataset, var: str) -> np.ndarray:
    x = panel[var]
    if panel.n_units < 2:
        raise TooFewUnits("cross-sectional dependence tests need at least 2 units")
    d = x - x.mean(axis=1, keepdims=True)
    ss = np.einsum("it,it->i", d, d)
    for unit, s in zip(panel.unit_ids, ss):
        if s == 0:
            raise ZeroVariance(f"unit {unit} has zero variance in {var}", unit)
    rho = np.clip(d @ d.T / np.sqrt(np.outer(ss, ss)), -1.0, 1.0)
    np.fill_diagonal(rho, 1.0)
    return rho


def _upper(rho: np.ndarray) -> np.ndarray:
    return rho[np.triu_indices(rho.shape[0], k=1)]


def cd_test(panel: PanelDataset, var: str) -> TestResult:
    """Pesaran CD: sqrt(2T / (N(N-1))) * sum_{i<j} rho_ij, two-sided normal p-value."""
    rho = _upper(pairwise_correlations(panel, var))
    N, T = panel.n_units, panel.n_years
    cd = math.sqrt(2.0 * T / (N * (N - 1))) * float(rho.sum())
    return TestResult("CD", cd, float(2.0 * norm.sf(abs(cd))),
                      {"mean_rho": float(rho.mean()), "mean_abs_rho": float(np.abs(rho).mean()),
                       "N": N, "T": T})


def cd_plus_test(panel: PanelDataset, var: str, threshold: float = CD_PLUS_THRESHOLD) -> TestResult:
    """Power-enhanced CD+ = J1 + J0.

    J1 standardises the sum of squared pairwise correlations with their exact
    null mean 1/(T-1) and variance 2(T-2)/((T-1)^2 (T+1)). J0 sums |rho_ij|
    over pairs with |rho_ij| > threshold * sqrt(log N / T); it is zero with
    probability tending to one under the null. One-sided p-value.
    """
    rho = _upper(pairwise_correlations(panel, var))
    N, T = panel.n_units, panel.n_years
    if T < 4:
        raise SeriesTooShort("CD+ needs at least 4 time periods")
    pairs = rho.size
    mean0 = 1.0 / (T - 1)
    var0 = 2.0 * (T - 2) / ((T - 1) ** 2 * (T + 1))
    j1 = float((rho ** 2 - mean0).sum() / math.sqrt(pairs * var0))
    delta = threshold * math.sqrt(math.log(N) / T)
    screened = np.abs(rho) > delta
    j0 = float(np.abs(rho[screened]).sum())
    stat = j1 + j0
    return TestResult("CD+", stat, float(norm.sf(stat)),
                      {"J1": j1, "J0": j0, "delta": delta, "screened_pairs": int(screened.sum())})


# --- unit roots ----------------------------------------------------------------

def cadf_regression(y, ybar, trend: bool = False):
    """OLS fit of dy_t on (1, [t], y_{t-1}, ybar_{t-1}, dybar_t)."""
    y = np.asarray(y, dtype=float)
    ybar = np.asarray(ybar, dtype=float)
    if y.size < 8:
        raise SeriesTooShort(f"CADF regression needs at least 8 observations, got {y.size}")
    if np.ptp(y) == 0:
        raise ZeroVariance("constant series in CADF regression")
    dy = np.diff(y)
    dybar = np.diff(ybar)
    cols = [np.ones(dy.size)]
    names = ["const"]
    if trend:
        cols.append(np.arange(1.0, dy.size + 1))
        names.append("trend")
    cols += [y[:-1], ybar[:-1], dybar]
    names += ["y_lag", "ybar_lag", "dybar"]
    try:
        return ols(dy, np.column_stack(cols), names)
    except RankDeficient as exc:
        raise CollinearRegressors(f"CADF regressors are collinear: {exc}", exc.columns) from exc


def cadf_stat(y, ybar, trend: bool = False) -> float:
    """t-statistic on y_{t-1} in the cross-sectionally augmented DF regression."""
    return cadf_regression(y, ybar, trend).tvalue("y_lag")


def _interp_grid(grid, value):
    value = min(max(value, grid[0]), grid[-1])
    k = int(np.searchsorted(grid, value, side="right")) - 1
    k = min(k, len(grid) - 2)
    w = (value - grid[k]) / (grid[k + 1] - grid[k])
    return k, w


def cips_critical_values(n_units: int, n_years: int) -> dict[float, float]:
    """Intercept-only CIPS critical values, bilinear in (N, T), clamped to the table."""
    i, wi = _interp_grid(N_GRID, n_units)
    j, wj = _interp_grid(T_GRID, n_years)
    out = {}
    for level, table in zip(LEVELS, CIPS_INTERCEPT):
        t = np.asarray(table)
        v = ((1 - wi) * (1 - wj) * t[i, j] + wi * (1 - wj) * t[i + 1, j]
             + (1 - wi) * wj * t[i, j + 1] + wi * wj * t[i + 1, j + 1])
        out[level] = float(v)
    return out


def cips_pvalue(stat: float, n_units: int, n_years: int) -> tuple[float, str | None]:
    """Linear interpolation between tabulated levels; truncated to [0.01, 0.10].

    The second element says which bound was hit ("<=" or ">="), or None.
    """
    cv = cips_critical_values(n_units, n_years)
    pts = sorted((c, lvl) for lvl, c in cv.items())
    if stat <= pts[0][0]:
        return pts[0][1], "<="
    if stat >= pts[-1][0]:
        return pts[-1][1], ">="
    for (c0, p0), (c1, p1) in zip(pts, pts[1:]):
        if c0 <= stat <= c1:
            return p0 + (p1 - p0) * (stat - c0) / (c1 - c0), None
    raise AssertionError("unreachable")


def cadf_pvalue(stat: float, n_years: int, trend: bool = False) -> float:
    """Lower-tail p-value of a unit CADF statistic against a simulated null."""
    null = cadf_null_draws(n_years, trend)
    below = np.searchsorted(null, stat, side="right")
    return float((below + 1) / (null.size + 1))


def cips_test(panel: PanelDataset, var: str, trend: bool = False) -> TestResult:
    """CIPS = mean of unit CADF statistics; also a Fisher combination of unit p-values."""
    x = panel[var]
    ybar = cross_sectional_average(panel, var)
    stats = np.empty(panel.n_units)
    for i, unit in enumerate(panel.unit_ids):
        try:
            stats[i] = cadf_stat(x[i], ybar, trend)
        except (ZeroVariance, CollinearRegressors, SeriesTooShort) as exc:
            raise type(exc)(f"unit {unit}: {exc}") from exc
    cips = float(stats.mean())
    if trend:
        p, bound = None, None
    else:
        p, bound = cips_pvalue(cips, panel.n_units, panel.n_years)
    unit_p = np.array([cadf_pvalue(s, panel.n_years, trend) for s in stats])
    fisher = float(-2.0 * np.log(unit_p).sum())
    detail = {
        "unit_statistics": dict(zip(panel.unit_ids, map(float, stats))),
        "p_value_bound": bound,
        "fisher_statistic": fisher,
        "fisher_p_value": float(chi2.sf(fisher, 2 * panel.n_units)),
        "critical_values": None if trend else cips_critical_values(panel.n_units, panel.n_years),
    }
    return TestResult("CIPS", cips, p, detail)


# --- slope homogeneity ------------------------------------------------------------

def hac_bandwidth(n_obs: int) -> int:
    return int(math.floor(4.0 * (n_obs / 100.0) ** (2.0 / 9.0)))


def bartlett_long_run_variance(u: np.ndarray, bandwidth: int) -> np.ndarray:
    """Long-run covariance of the rows of ``u`` (n_obs x k) with Bartlett weights."""
    n = u.shape[0]
    S = u.T @ u / n
    for lag in range(1, bandwidth + 1):
        G = u[lag:].T @ u[:-lag] / n
        S += (1.0 - lag / (bandwidth + 1.0)) * (G + G.T)
    return S


def _slope_data(panel: PanelDataset, spec: RegressionSpec):
    terms = [f"L{p}.{spec.dependent}" if p > 1 else f"L.{spec.dependent}"
             for p in range(1, spec.lag_dependent + 1)] + list(spec.regressors)
    parsed = [parse_term(t) for t in terms]
    p = max([0] + [lag for _, lag in parsed])
    T = panel.n_years
    units = spec.group.members if spec.group is not None else panel.unit_ids
    out = []
    for u in units:
        i = panel.unit_index(u)
        y = panel[spec.dependent][i, p:]
        X = np.column_stack([panel[v][i, p - lag:T - lag] for v, lag in parsed])
        out.append((u, y, X))
    return terms, out


SMALL_SAMPLE_MODES = ("simulated", "analytic", "none")


def slope_homogeneity_test(panel: PanelDataset, spec: RegressionSpec,
                           small_sample: str = "simulated") -> TestResult:
    """HAC-robust dispersion test of equal slopes across units.

    Unit intercepts are partialled out; slopes cover the lagged dependent
    variable and the regressors. With Q_i = X_i'M X_i / T and V_i the Bartlett
    long-run variance of x_t e_t, e the residuals under the pooled slope,
    each unit contributes z_i = T (b_i - b)' Q_i V_i^{-1} Q_i (b_i - b) with
    b the pooled slope weighted by Q_i V_i^{-1} Q_i. The statistic
    sqrt(N) (mean z - m) / sqrt(v) is standard normal under homogeneity.

    ``small_sample`` picks (m, v): "none" uses (k, 2k); "analytic" uses
    (k, 2k(T-k-1)/(T+1)); "simulated" uses the Gaussian null moments of z_i
    at the same T, k and bandwidth (mean scaled by (N-1)/N for the pooled
    slope), which tend to (k, 2k) as T grows.
    Two-sided p-value.
    """
    if small_sample not in SMALL_SAMPLE_MODES:
        raise ValueError(f"small_sample must be one of {SMALL_SAMPLE_MODES}")
    spec.check(panel)
    terms, data = _slope_data(panel, spec)
    k = len(terms)
    N = len(data)
    if N < 2:
        raise TooFewUnits("slope homogeneity needs at least 2 units")
    n_obs = data[0][1].size
    if n_obs <= k + 3:
        raise InsufficientDegreesOfFreedom(f"{n_obs} observations per unit for {k} slopes")
    bw = hac_bandwidth(n_obs)

    demeaned = []
    betas = []
    for unit, y, X in data:
        Xd = X - X.mean(axis=0)
        yd = y - y.mean()
        try:
            fit = ols(yd, Xd, terms)
        except RankDeficient as exc:
            raise CollinearRegressors(f"unit {unit}: {exc}", exc.columns) from exc
        if np.allclose(fit.residuals, 0.0, atol=1e-12 * max(1.0, float(np.abs(yd).max()))):
            raise ZeroVariance(f"unit {unit}: zero residual variance", unit)
        demeaned.append((unit, yd, Xd))
        betas.append(fit.coefficients)

    # residual long-run variances are taken under the null of a common slope
    pooled_fe = np.linalg.solve(sum(X.T @ X for _, _, X in demeaned),
                                sum(X.T @ y for _, y, X in demeaned))
    weights = []
    for unit, yd, Xd in demeaned:
        e = yd - Xd @ pooled_fe
        Q = Xd.T @ Xd / n_obs
        V = bartlett_long_run_variance(Xd * e[:, None], bw) * n_obs / (n_obs - 1)
        try:
            W = Q @ np.linalg.solve(V, Q)
        except np.linalg.LinAlgError:
            raise ZeroVariance(f"unit {unit}: singular long-run variance", unit) from None
        weights.append(W)

    pooled = np.linalg.solve(sum(weights), sum(W @ b for W, b in zip(weights, betas)))
    z = np.array([n_obs * (b - pooled) @ W @ (b - pooled) for W, b in zip(weights, betas)])
    S = float(z.sum())
    if small_sample == "none":
        m, v = float(k), 2.0 * k
    elif small_sample == "analytic":
        m, v = float(k), 2.0 * k * (n_obs - k - 1) / (n_obs + 1)
    else:
        m, v = slope_unit_moments(n_obs, k, bw)
        # one pooled k-vector is estimated from the N units
        m *= (N - 1) / N
    delta = math.sqrt(N) * (S / N - m) / math.sqrt(v)
    return TestResult("slope homogeneity", delta, float(2.0 * norm.sf(abs(delta))),
                      {"S": S, "k": k, "bandwidth": bw, "null_mean": m, "null_var": v,
                       "small_sample": small_sample,
                       "pooled": dict(zip(terms, map(float, pooled)))})
