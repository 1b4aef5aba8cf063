"""Simulated panels and a seeded Monte Carlo harness.

Every replication draws from its own ``numpy`` generator seeded by
``SeedSequence([master_seed, replication])``, so results do not depend on the
order in which replications are scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

from .panel import PanelDataset

T_ = TypeVar("T_")


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, rep]))


def run_replications(fn: Callable[[np.random.Generator], T_], n_reps: int, seed: int = 0,
                     workers: int = 1) -> list[T_]:
    """Call ``fn(rng)`` once per replication; results come back in replication order."""
    rngs = [replication_rng(seed, r) for r in range(n_reps)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, rngs))
    return [fn(g) for g in rngs]


def unit_names(n: int) -> tuple[str, ...]:
    width = len(str(n))
    return tuple(f"U{i:0{width}d}" for i in range(1, n + 1))


def panel_from_array(x: np.ndarray, name: str = "y", first_year: int = 1990) -> PanelDataset:
    n, t = x.shape
    return PanelDataset(unit_names(n), tuple(range(first_year, first_year + t)), {name: x})


def ar1(rng, n, t, coef, sd=1.0, burn=50):
    e = rng.standard_normal((n, t + burn)) * sd
    x = np.zeros_like(e)
    for s in range(1, t + burn):
        x[:, s] = coef * x[:, s - 1] + e[:, s]
    return x[:, burn:]


def random_walks(rng, n, t):
    return np.cumsum(rng.standard_normal((n, t)), axis=1)


def one_factor_panel(rng, n, t, loading=1.0, noise_sd=0.1):
    f = rng.standard_normal(t)
    return loading * f[None, :] + noise_sd * rng.standard_normal((n, t))


@dataclass(frozen=True)
class FiscalDGP:
    """Primary-balance rule with debt feedback and one common factor.

    Defaults are the aggregate-panel point estimates with the current
    account (phi 0.358, rho 0.033, output gap 0.219, spending gap -0.150).
    ``slope_spread`` adds uniform(-spread, spread) heterogeneity to phi and
    the gap slopes.
    """

    n_units: int = 52
    n_years: int = 33
    first_year: int = 1990
    phi: float = 0.358
    rho: float = 0.033
    beta_y: float = 0.219
    beta_g: float = -0.150
    beta_a: float = 0.0851
    psi: float = -0.357
    break_year: int = 2008
    const_mean: float = -1.9
    slope_spread: float = 0.0
    debt_growth: float = 1.01
    # False: debt is an exogenous persistent AR(1) around a unit level
    debt_feedback: bool = True
    debt_ar: float = 0.9
    shock_sd: float = 1.0
    burn: int = 60

    def simulate(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        n, T, burn = self.n_units, self.n_years, self.burn
        tt = T + burn
        years = np.arange(self.first_year - burn, self.first_year + T)
        f = np.zeros(tt)
        ef = rng.standard_normal(tt)
        for s in range(1, tt):
            f[s] = 0.6 * f[s - 1] + ef[s]

        def loadings(lo, hi):
            return rng.uniform(lo, hi, n)[:, None]

        ygap = loadings(0.5, 1.5) * f + ar1(rng, n, tt, 0.5, 1.5, burn=0)
        ggap = loadings(-1.5, -0.5) * f + ar1(rng, n, tt, 0.3, 2.5, burn=0)
        ca = loadings(0.0, 1.0) * f + ar1(rng, n, tt, 0.7, 2.0, burn=0)
        load_s = loadings(0.5, 1.5)

        spread = self.slope_spread
        phi = self.phi + rng.uniform(-spread, spread, n)
        by = self.beta_y + rng.uniform(-spread, spread, n)
        bg = self.beta_g + rng.uniform(-spread, spread, n)
        const = self.const_mean + 0.5 * rng.standard_normal(n)
        dummy = (years >= self.break_year).astype(float)

        eps = self.shock_sd * rng.standard_normal((n, tt))
        zeta = 2.0 * rng.standard_normal((n, tt))
        s = np.zeros((n, tt))
        b = np.zeros((n, tt))
        level = rng.uniform(20, 100, n)
        b[:, 0] = level
        load_b = loadings(2.0, 6.0)[:, 0]
        for t in range(1, tt):
            s[:, t] = (const + phi * s[:, t - 1] + self.rho * b[:, t - 1] + by * ygap[:, t]
                       + bg * ggap[:, t] + self.beta_a * ca[:, t] + self.psi * dummy[t]
                       + load_s[:, 0] * f[t] + eps[:, t])
            if self.debt_feedback:
                b[:, t] = self.debt_growth * (b[:, t - 1] - s[:, t]) + zeta[:, t]
            else:
                b[:, t] = (level + self.debt_ar * (b[:, t - 1] - level) + load_b * f[t]
                           + 2.5 * zeta[:, t])
        keep = slice(burn, tt)
        return {"pb": s[:, keep], "debt": b[:, keep], "ygap": ygap[:, keep],
                "ggap": ggap[:, keep], "ca": ca[:, keep]}

    def panel(self, rng: np.random.Generator, levels: bool = False) -> PanelDataset:
        """Simulated panel; with ``levels`` also real GDP and government consumption indices."""
        data = self.simulate(rng)
        if levels:
            n, T = self.n_units, self.n_years
            t = np.arange(T)
            growth_y = rng.uniform(0.01, 0.04, n)[:, None]
            growth_g = rng.uniform(0.0, 0.03, n)[:, None]
            data["gdp"] = 100.0 * np.exp(growth_y * t) * (1.0 + data["ygap"] / 100.0)
            data["gcons"] = 20.0 * np.exp(growth_g * t) * (1.0 + data["ggap"] / 100.0)
        return PanelDataset(unit_names(self.n_units),
                            tuple(range(self.first_year, self.first_year + self.n_years)), data)


def slope_panel(rng, n=52, t=33, slopes=None, ar=0.0):
    """y_it = a_i + b_i x_it + e_it with iid normal x and e (AR(``ar``) errors)."""
    if slopes is None:
        slopes = np.full(n, 0.5)
    a = rng.standard_normal(n)[:, None]
    x = rng.standard_normal((n, t))
    e = ar1(rng, n, t, ar, 1.0) if ar else rng.standard_normal((n, t))
    y = a + np.asarray(slopes)[:, None] * x + e
    return PanelDataset(unit_names(n), tuple(range(1990, 1990 + t)), {"x": x, "y": y})
