"""Least squares on a column-pivoted QR factorisation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import qr, solve_triangular

from .errors import InsufficientDegreesOfFreedom, RankDeficient

log = logging.getLogger(__name__)

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class OLSFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    dof: int
    columns: tuple[str, ...]
    dropped: tuple[str, ...] = ()
    # (X'X)^{-1} over the retained columns, in ``columns`` order
    xtx_inv: np.ndarray = field(repr=False, default=None)

    @property
    def sigma2(self) -> float:
        return float(self.residuals @ self.residuals) / self.dof

    @property
    def bse(self) -> np.ndarray:
        return np.sqrt(self.sigma2 * np.diag(self.xtx_inv))

    def tvalue(self, name: str) -> float:
        k = self.columns.index(name)
        return float(self.coefficients[k] / self.bse[k])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.columns, map(float, self.coefficients)))


def numerical_rank(X: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if X.shape[1] == 0:
        return 0
    R = qr(X, mode="r", pivoting=True)[0]
    d = np.abs(np.diag(R))
    if d[0] == 0:
        return 0
    return int(np.sum(d > rtol * d[0]))


def collinear_columns(X: np.ndarray, rtol: float = RANK_RTOL) -> list[int]:
    """Indices of columns that add no rank when columns are taken left to right."""
    kept: list[int] = []
    dropped: list[int] = []
    for j in range(X.shape[1]):
        trial = kept + [j]
        if numerical_rank(X[:, trial], rtol) == len(trial):
            kept.append(j)
        else:
            dropped.append(j)
    return dropped


def ols(y, X, names: Sequence[str] | None = None, *, droppable: Sequence[str] = (),
        rtol: float = RANK_RTOL) -> OLSFit:
    """Minimise ``||y - X b||`` by pivoted QR.

    Rank is decided at ``rtol`` relative to the leading diagonal of R. If X is
    rank deficient, the latest-ordered collinear columns are dropped when all
    of them appear in ``droppable`` (with a logged warning); otherwise
    :class:`RankDeficient` names them.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(k))
    if n <= k:
        raise InsufficientDegreesOfFreedom(f"{n} observations for {k} columns")

    Q, R, P = qr(X, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > rtol * d[0])) if d.size and d[0] > 0 else 0

    dropped: tuple[str, ...] = ()
    if rank < k:
        bad = [names[j] for j in collinear_columns(X, rtol)]
        if not bad:
            raise RankDeficient(f"design has numerical rank {rank} < {k} columns")
        not_allowed = [c for c in bad if c not in set(droppable)]
        if not_allowed:
            raise RankDeficient(f"collinear design columns: {', '.join(not_allowed)}", not_allowed)
        log.warning("dropping collinear columns: %s", ", ".join(bad))
        keep = [j for j in range(k) if names[j] not in set(bad)]
        X = X[:, keep]
        names = tuple(names[j] for j in keep)
        dropped = tuple(bad)
        k = len(keep)
        Q, R, P = qr(X, mode="economic", pivoting=True)

    z = Q.T @ y
    beta_p = solve_triangular(R, z, check_finite=False)
    beta = np.empty(k)
    beta[P] = beta_p
    resid = y - X @ beta
    Rinv = solve_triangular(R, np.eye(k), check_finite=False)
    cov_p = Rinv @ Rinv.T
    xtx_inv = np.empty((k, k))
    xtx_inv[np.ix_(P, P)] = cov_p
    return OLSFit(coefficients=beta, residuals=resid, dof=n - k, columns=names,
                  dropped=dropped, xtx_inv=xtx_inv)
