"""Seeded reference simulations for null distributions.

These produce the embedded CIPS critical values, the per-unit CADF null
used by the Fisher combination, and the small-sample moments of the
HAC-studentised unit statistic in the slope-homogeneity test. Everything
here is vectorised over replications and independent of the per-series
code paths in :mod:`fiscalpanel.diagnostics`.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

CIPS_SEED = 20070322
CADF_SEED = 20070101
SLOPE_SEED = 20130901


def batched_cadf_t(y: np.ndarray, trend: bool = False) -> np.ndarray:
    """CADF t-statistics for panels stacked as ``y[rep, unit, time]``."""
    R, N, T = y.shape
    ybar = y.mean(axis=1)
    dy = np.diff(y, axis=2)
    dybar = np.diff(ybar, axis=1)
    n = T - 1
    cols = [np.ones((R, N, n))]
    if trend:
        cols.append(np.broadcast_to(np.arange(1.0, n + 1), (R, N, n)))
    cols += [y[:, :, :-1],
             np.broadcast_to(ybar[:, None, :-1], (R, N, n)),
             np.broadcast_to(dybar[:, None, :], (R, N, n))]
    X = np.stack(cols, axis=-1)
    k = X.shape[-1]
    pos = 2 if trend else 1
    XtX = np.einsum("rntk,rntl->rnkl", X, X)
    Xty = np.einsum("rntk,rnt->rnk", X, dy)
    inv = np.linalg.inv(XtX)
    beta = np.einsum("rnkl,rnl->rnk", inv, Xty)
    resid = dy - np.einsum("rntk,rnk->rnt", X, beta)
    s2 = (resid ** 2).sum(axis=2) / (n - k)
    return beta[..., pos] / np.sqrt(s2 * inv[..., pos, pos])


def simulate_cips(n_units: int, n_years: int, reps: int, seed: int = CIPS_SEED,
                  chunk: int = 500) -> np.ndarray:
    """CIPS statistics under independent Gaussian random walks."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, n_units, n_years]))
    out = []
    done = 0
    while done < reps:
        r = min(chunk, reps - done)
        y = np.cumsum(rng.standard_normal((r, n_units, n_years)), axis=2)
        out.append(batched_cadf_t(y).mean(axis=1))
        done += r
    return np.concatenate(out)


def cips_quantiles(n_units: int, n_years: int, reps: int = 20000,
                   levels=(0.01, 0.05, 0.10)) -> tuple[float, ...]:
    draws = simulate_cips(n_units, n_years, reps)
    return tuple(float(q) for q in np.quantile(draws, levels))


@lru_cache(maxsize=32)
def cadf_null_draws(n_years: int, trend: bool = False, n_ref: int = 20,
                    reps: int = 1000, seed: int = CADF_SEED) -> np.ndarray:
    """Sorted unit CADF statistics pooled over simulated independent random-walk panels."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, n_years, int(trend)]))
    y = np.cumsum(rng.standard_normal((reps, n_ref, n_years)), axis=2)
    return np.sort(batched_cadf_t(y, trend).ravel())


def bartlett_lrv_batched(u: np.ndarray, bandwidth: int) -> np.ndarray:
    """Bartlett long-run covariance of ``u[rep, time, k]`` (divisor = n_obs)."""
    n = u.shape[1]
    S = np.einsum("rtk,rtl->rkl", u, u) / n
    for lag in range(1, bandwidth + 1):
        G = np.einsum("rtk,rtl->rkl", u[:, lag:], u[:, :-lag]) / n
        S = S + (1.0 - lag / (bandwidth + 1.0)) * (G + np.swapaxes(G, 1, 2))
    return S


@lru_cache(maxsize=64)
def slope_unit_moments(n_obs: int, k: int, bandwidth: int, reps: int = 100000,
                       seed: int = SLOPE_SEED) -> tuple[float, float]:
    """Null mean and variance of the unit statistic T (b_i - b)' Q V^{-1} Q (b_i - b).

    Gaussian iid regressors and errors, intercept partialled out, V from the
    errors under the null with a T-1 divisor, as in the test itself.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, n_obs, k, bandwidth]))
    vals = []
    chunk = 20000
    done = 0
    while done < reps:
        r = min(chunk, reps - done)
        X = rng.standard_normal((r, n_obs, k))
        e = rng.standard_normal((r, n_obs))
        X = X - X.mean(axis=1, keepdims=True)
        e = e - e.mean(axis=1, keepdims=True)
        XtX = np.einsum("rtk,rtl->rkl", X, X)
        b = np.linalg.solve(XtX, np.einsum("rtk,rt->rk", X, e)[..., None])[..., 0]
        V = bartlett_lrv_batched(X * e[..., None], bandwidth) * n_obs / (n_obs - 1)
        Q = XtX / n_obs
        Qb = np.einsum("rkl,rl->rk", Q, b)
        z = n_obs * np.einsum("rk,rk->r", Qb, np.linalg.solve(V, Qb[..., None])[..., 0])
        vals.append(z)
        done += r
    z = np.concatenate(vals)
    return float(z.mean()), float(z.var(ddof=1))
