"""Balanced regression panels and QR least squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, InputError, RankDeficient


@dataclass(frozen=True)
class PanelMatrix:
    """Balanced region-by-year panel: ``y`` is N x T, ``X`` is N x T x k."""

    region_ids: tuple
    years: np.ndarray
    y: np.ndarray
    X: np.ndarray
    regressor_names: tuple

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        X = np.array(self.X, dtype=float)
        if X.ndim == 2:
            X = X[:, :, None]
        years = np.asarray(self.years, dtype=int)
        object.__setattr__(self, "region_ids", tuple(str(r) for r in self.region_ids))
        object.__setattr__(self, "regressor_names", tuple(self.regressor_names))
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        N, T = len(self.region_ids), years.size
        if y.shape != (N, T) or X.shape[:2] != (N, T):
            raise DimensionMismatch(f"panel arrays {y.shape}/{X.shape} do not match {N} regions x {T} years")
        k = X.shape[2]
        if k < 1 or len(self.regressor_names) != k:
            raise DimensionMismatch("need at least one regressor and one name per regressor")
        if T > 1 and np.any(np.diff(years) != 1):
            raise InputError("panel years must be consecutive")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise InputError("panel contains non-finite entries")
        for a in (y, X):
            a.setflags(write=False)

    @property
    def n_regions(self) -> int:
        return len(self.region_ids)

    @property
    def n_periods(self) -> int:
        return self.years.size

    @property
    def k(self) -> int:
        return self.X.shape[2]

    def stacked(self):
        """``(y, X)`` flattened region-major to ``(N*T,)`` and ``(N*T, k)``."""
        return self.y.reshape(-1), self.X.reshape(-1, self.k)

    def subset(self, names) -> "PanelMatrix":
        idx = [self.regressor_names.index(n) for n in names]
        return PanelMatrix(self.region_ids, self.years, self.y, self.X[:, :, idx], tuple(names))

    def permute_regions(self, order) -> "PanelMatrix":
        order = list(order)
        return PanelMatrix(
            [self.region_ids[i] for i in order], self.years, self.y[order], self.X[order], self.regressor_names
        )


@dataclass(frozen=True)
class OlsResult:
    coefficients: np.ndarray
    sigma_sq: float
    covariance: np.ndarray
    residuals: np.ndarray
    df_resid: int


def ols(y, X, rank_tol: float = 1e-10) -> OlsResult:
    """Least squares through a reduced QR factorisation."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({n},)")
    if n < k:
        raise RankDeficient(f"{n} observations for {k} coefficients")
    Q, R = np.linalg.qr(X)
    d = np.abs(np.diag(R))
    if d.size == 0 or np.min(d) <= rank_tol * max(1.0, np.max(d)):
        raise RankDeficient("design matrix is not of full column rank")
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ coef
    df = n - k
    sigma_sq = float(resid @ resid / df) if df > 0 else 0.0
    Rinv = np.linalg.solve(R, np.eye(k))
    cov = sigma_sq * (Rinv @ Rinv.T)
    return OlsResult(coef, sigma_sq, cov, resid, df)
