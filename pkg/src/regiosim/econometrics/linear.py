"""Fixed-effects (within) and random-effects (Swamy-Arora GLS) panels, Hausman test."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import IncompatibleFits, NoWithinVariation, RankDeficient
from .panel import PanelMatrix, ols

PSD_TOL = 1e-10


class VarianceComponentWarning(UserWarning):
    """A negative variance-component estimate was clamped at zero."""


@dataclass(frozen=True)
class FeFit:
    names: tuple
    coefficients: np.ndarray
    covariance: np.ndarray
    r_squared: float
    f_stat: float
    f_pvalue: float
    df_resid: int
    sigma_eps_sq: float

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    @property
    def t_stats(self) -> np.ndarray:
        return self.coefficients / self.std_errors

    @property
    def pvalues(self) -> np.ndarray:
        return 2 * stats.t.sf(np.abs(self.t_stats), self.df_resid)


@dataclass(frozen=True)
class ReFit:
    names: tuple
    coefficients: np.ndarray
    covariance: np.ndarray
    intercept: float
    r_squared: float
    sigma_alpha_sq: float
    sigma_eps_sq: float
    theta: float
    df_resid: int

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    @property
    def pvalues(self) -> np.ndarray:
        return 2 * stats.norm.sf(np.abs(self.coefficients / self.std_errors))


@dataclass(frozen=True)
class HausmanResult:
    statistic: float
    df: int
    p: float
    regularized: bool

    def verdict(self, level: float = 0.01) -> str:
        """``"RNH"`` (reject: fixed effects) or ``"ANH"`` (accept: random effects)."""
        return "RNH" if self.p < level else "ANH"


def _demean(panel: PanelMatrix):
    y = panel.y - panel.y.mean(axis=1, keepdims=True)
    X = panel.X - panel.X.mean(axis=1, keepdims=True)
    return y.reshape(-1), X.reshape(-1, panel.k)


def fe_within(panel: PanelMatrix) -> FeFit:
    N, T, k = panel.n_regions, panel.n_periods, panel.k
    y, X = _demean(panel)
    scale = np.maximum(np.abs(panel.X).max(axis=(0, 1)), 1.0)
    flat = np.all(np.abs(X) <= 1e-12 * scale, axis=0)
    if np.any(flat):
        names = [panel.regressor_names[j] for j in np.flatnonzero(flat)]
        raise NoWithinVariation(f"no within-region variation in {names}")
    df = N * T - N - k
    if df <= 0:
        raise RankDeficient(f"no residual degrees of freedom (N*T - N - k = {df})")
    res = ols(y, X)
    rss = float(res.residuals @ res.residuals)
    tss = float(y @ y)
    sigma_sq = rss / df
    cov = res.covariance * (sigma_sq / res.sigma_sq) if res.sigma_sq > 0 else np.zeros((k, k))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    if r2 < 1.0:
        f = (r2 / k) / ((1.0 - r2) / df)
        p = float(stats.f.sf(f, k, df))
    else:
        f, p = float("inf"), 0.0
    return FeFit(panel.regressor_names, res.coefficients, cov, r2, float(f), p, df, sigma_sq)


def re_gls(panel: PanelMatrix) -> ReFit:
    """Feasible GLS by quasi-demeaning with Swamy-Arora variance components."""
    N, T, k = panel.n_regions, panel.n_periods, panel.k
    if N < k + 2:
        raise RankDeficient(f"random effects need N >= k + 2 regions (N={N}, k={k})")
    fe = fe_within(panel)
    sigma_e = fe.sigma_eps_sq
    ybar = panel.y.mean(axis=1)
    Xbar = panel.X.mean(axis=1)
    between = ols(ybar, np.column_stack([np.ones(N), Xbar]))
    sigma_b = float(between.residuals @ between.residuals) / (N - k - 1)
    sigma_a = sigma_b - sigma_e / T
    if sigma_a < 0:
        warnings.warn(f"negative sigma_alpha^2 estimate {sigma_a:.3g} clamped at 0", VarianceComponentWarning, stacklevel=2)
        sigma_a = 0.0
    theta = 1.0 - np.sqrt(sigma_e / (sigma_e + T * sigma_a)) if sigma_e + T * sigma_a > 0 else 0.0
    ys = (panel.y - theta * ybar[:, None]).reshape(-1)
    Xs = (panel.X - theta * Xbar[:, None, :]).reshape(-1, k)
    Z = np.column_stack([np.full(N * T, 1.0 - theta), Xs])
    res = ols(ys, Z)
    ZtZ_inv = res.covariance / res.sigma_sq if res.sigma_sq > 0 else np.linalg.pinv(Z.T @ Z)
    cov = sigma_e * ZtZ_inv[1:, 1:]
    fitted = res.coefficients[0] + panel.X.reshape(-1, k) @ res.coefficients[1:]
    yy = panel.y.reshape(-1)
    c = np.corrcoef(yy, fitted)[0, 1] if np.std(fitted) > 0 and np.std(yy) > 0 else 0.0
    return ReFit(
        panel.regressor_names,
        res.coefficients[1:],
        cov,
        float(res.coefficients[0]),
        float(min(max(c * c, 0.0), 1.0)),
        float(sigma_a),
        float(sigma_e),
        float(theta),
        N * T - k - 1,
    )


def hausman(fe: FeFit, re: ReFit) -> HausmanResult:
    if tuple(fe.names) != tuple(re.names):
        raise IncompatibleFits(f"regressor sets differ: {fe.names} vs {re.names}")
    q = fe.coefficients - re.coefficients
    D = fe.covariance - re.covariance
    D = 0.5 * (D + D.T)
    vals, vecs = np.linalg.eigh(D)
    scale = max(float(np.max(np.abs(vals))), np.finfo(float).tiny)
    regularized = bool(np.min(vals) < PSD_TOL * scale)
    if not regularized:
        H = float(q @ np.linalg.solve(D, q))
        df = q.size
    else:
        # pseudo-inverse over the positive part of the spectrum keeps H >= 0
        keep = vals > PSD_TOL * scale
        proj = vecs[:, keep].T @ q
        H = float(np.sum(proj**2 / vals[keep]))
        df = int(np.count_nonzero(keep))
    H = max(H, 0.0)
    p = float(stats.chi2.sf(H, df)) if df > 0 else 1.0
    return HausmanResult(H, df, p, regularized)
