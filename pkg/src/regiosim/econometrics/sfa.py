"""Time-varying decay stochastic production frontier.

Model, with ``T`` the last panel period::

    y_it = b0 + x_it' b + v_it - exp(-eta (t - T)) u_i
    v_it ~ N(0, sigma_v^2),  u_i ~ N+(mu, sigma_u^2)

parameterised by ``sigma_sq = sigma_v^2 + sigma_u^2`` and
``gamma_var = sigma_u^2 / sigma_sq``. The log-likelihood integrates ``u_i``
out analytically per region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats
from scipy.special import expit, log_ndtr, logit

from ..errors import DidNotConverge, DimensionMismatch, InputError, NonFiniteLikelihood, NotConverged, ParameterOutOfRange
from .panel import PanelMatrix, ols

GAMMA_FLOOR = 1e-8
_LOG_2PI = math.log(2 * math.pi)
_PENALTY = 1e100


@dataclass(frozen=True)
class SfaParams:
    beta: np.ndarray
    sigma_sq: float
    gamma_var: float
    eta: float = 0.0
    mu_trunc: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "beta", np.array(self.beta, dtype=float).reshape(-1))

    def validate(self) -> "SfaParams":
        if not (self.sigma_sq > 0 and math.isfinite(self.sigma_sq)):
            raise ParameterOutOfRange(f"sigma_sq must be positive, got {self.sigma_sq}")
        if not 0 <= self.gamma_var < 1:
            raise ParameterOutOfRange(f"gamma_var must lie in [0, 1), got {self.gamma_var}")
        if not (math.isfinite(self.eta) and math.isfinite(self.mu_trunc) and np.all(np.isfinite(self.beta))):
            raise ParameterOutOfRange("non-finite frontier parameters")
        return self

    @property
    def sigma_u_sq(self) -> float:
        return self.gamma_var * self.sigma_sq

    @property
    def sigma_v_sq(self) -> float:
        return (1 - self.gamma_var) * self.sigma_sq


@dataclass(frozen=True)
class SfaFit:
    params: SfaParams
    loglik: float
    std_errors: SfaParams
    converged: bool
    n_evals: int
    covariance: np.ndarray = field(repr=False, default=None)
    regressor_names: tuple = ()
    start_index: int = 0

    @property
    def names(self) -> list[str]:
        """Labels for the natural-parameter vector used by ``covariance``."""
        return ["const", *self.regressor_names, "sigma_sq", "gamma_var", "eta", "mu_trunc"]

    def vector(self) -> np.ndarray:
        p = self.params
        return np.r_[p.beta, p.sigma_sq, p.gamma_var, p.eta, p.mu_trunc]

    def se_vector(self) -> np.ndarray:
        s = self.std_errors
        return np.r_[s.beta, s.sigma_sq, s.gamma_var, s.eta, s.mu_trunc]


def decay_weights(panel: PanelMatrix, eta: float) -> np.ndarray:
    """``exp(-eta (t - T))`` for each panel period; equals 1 in the last year."""
    tt = (panel.years - panel.years[-1]).astype(float)
    return np.exp(-eta * tt)


def _residuals(beta, panel):
    if beta.size != panel.k + 1:
        raise DimensionMismatch(f"expected {panel.k + 1} coefficients (with intercept), got {beta.size}")
    return panel.y - beta[0] - panel.X @ beta[1:]


def _region_terms(params: SfaParams, panel: PanelMatrix):
    E = _residuals(params.beta, panel)
    w = decay_weights(panel, params.eta)
    su2, sv2 = params.sigma_u_sq, params.sigma_v_sq
    we = E @ w
    ww = float(w @ w)
    den = sv2 + su2 * ww
    mu_star = (params.mu_trunc * sv2 - su2 * we) / den
    sig_star = np.sqrt(sv2 * su2 / den)
    return E, w, we, ww, den, mu_star, sig_star


def sfa_loglik_by_region(params: SfaParams, panel: PanelMatrix) -> np.ndarray:
    params.validate()
    T = panel.n_periods
    sv2 = params.sigma_v_sq
    if params.gamma_var == 0:
        E = _residuals(params.beta, panel)
        return -0.5 * T * (_LOG_2PI + math.log(sv2)) - (E**2).sum(axis=1) / (2 * sv2)
    E, w, we, ww, den, mu_star, sig_star = _region_terms(params, panel)
    su2, mu = params.sigma_u_sq, params.mu_trunc
    # mu*^2/sigma*^2 - mu^2/sigma_u^2 in cancellation-free form
    quad = (su2 * we**2 - 2 * mu * sv2 * we - mu * mu * sv2 * ww) / (2 * den * sv2)
    ll = (
        -0.5 * T * _LOG_2PI
        - 0.5 * (T - 1) * math.log(sv2)
        - 0.5 * np.log(den)
        - (E**2).sum(axis=1) / (2 * sv2)
        + quad
        + log_ndtr(mu_star / sig_star)
        - log_ndtr(mu / math.sqrt(su2))
    )
    return ll


def sfa_loglik(params: SfaParams, panel: PanelMatrix) -> float:
    """Exact marginal log-likelihood of the panel."""
    with np.errstate(all="ignore"):
        # fsum makes the total independent of region order
        ll = math.fsum(sfa_loglik_by_region(params, panel))
    if not math.isfinite(ll):
        raise NonFiniteLikelihood("log-likelihood is not finite at these parameters")
    return ll


# unconstrained vector: [beta..., log sigma_sq, logit gamma_var, eta, (mu_trunc)]
def _unpack(theta, k, estimate_mu):
    beta = theta[: k + 1]
    sigma_sq = math.exp(theta[k + 1])
    g = float(np.clip(expit(theta[k + 2]), GAMMA_FLOOR, 1 - GAMMA_FLOOR))
    eta = float(theta[k + 3])
    mu = float(theta[k + 4]) if estimate_mu else 0.0
    return SfaParams(beta, sigma_sq, g, eta, mu)


def _pack(p: SfaParams, estimate_mu):
    g = min(max(p.gamma_var, GAMMA_FLOOR), 1 - GAMMA_FLOOR)
    head = [*p.beta, math.log(p.sigma_sq), float(logit(g)), p.eta]
    return np.array(head + ([p.mu_trunc] if estimate_mu else []), dtype=float)


def _num_grad(f, x, rel_step=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def _num_hessian(grad, x, rel_step=1e-4):
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        H[:, i] = (grad(xp) - grad(xm)) / (2 * h)
    return 0.5 * (H + H.T)


@dataclass
class SfaOptions:
    estimate_mu_trunc: bool = True
    max_iter: int = 500
    tol: float = 1e-6
    n_starts: int = 4
    seed: int = 0
    grad_tol: float = 1e-3


def ols_start(panel: PanelMatrix, estimate_mu: bool = True) -> SfaParams:
    """Moment-based start: OLS slopes, intercept shifted by the half-normal mean."""
    y, X = panel.stacked()
    Z = np.column_stack([np.ones(y.size), X])
    res = ols(y, Z)
    s2 = float(res.residuals.var())
    g0 = 0.5
    sigma_sq = s2 / (1 - g0 * 2 / math.pi)
    beta = res.coefficients.copy()
    beta[0] += math.sqrt(2 / math.pi * g0 * sigma_sq)
    return SfaParams(beta, sigma_sq, g0, 0.0, 0.0)


def sfa_fit(panel: PanelMatrix, options: SfaOptions | None = None, **kwargs) -> SfaFit:
    """Maximum-likelihood fit by BFGS with central-difference gradients.

    Starts from :func:`ols_start` plus ``n_starts - 1`` perturbations, each
    drawn from a generator seeded with ``(seed, start index)``. Returns the
    converged start with the highest log-likelihood (lowest index on ties).
    """
    opts = options or SfaOptions()
    for key, value in kwargs.items():
        if not hasattr(opts, key):
            raise InputError(f"unknown sfa_fit option {key!r}")
        setattr(opts, key, value)
    if panel.n_periods < 2:
        raise InputError("the decay frontier needs at least two periods")
    k = panel.k
    est_mu = opts.estimate_mu_trunc
    base = ols_start(panel, est_mu)
    y, X = panel.stacked()
    se_ols = np.sqrt(np.diag(ols(y, np.column_stack([np.ones(y.size), X])).covariance))
    n_evals = 0

    def negll(theta):
        nonlocal n_evals
        n_evals += 1
        with np.errstate(all="ignore"):
            p = _unpack(theta, k, est_mu)
            v = -float(np.sum(sfa_loglik_by_region(p, panel)))
        return v if math.isfinite(v) else _PENALTY

    def grad(theta):
        return _num_grad(negll, theta)

    theta0 = _pack(base, est_mu)
    runs = []
    for s in range(max(1, opts.n_starts)):
        start = theta0.copy()
        if s > 0:
            rng = np.random.default_rng([opts.seed, s])
            start[: k + 1] += rng.normal(0.0, 2.0, k + 1) * se_ols
            start[k + 1] += rng.normal(0.0, 0.3)
            start[k + 2] += rng.normal(0.0, 1.0)
            start[k + 3] += rng.normal(0.0, 0.05)
            if est_mu:
                start[k + 4] += rng.normal(0.0, math.sqrt(base.sigma_u_sq))
        res = optimize.minimize(
            negll, start, jac=grad, method="BFGS", options={"maxiter": opts.max_iter, "gtol": opts.tol}
        )
        g = grad(res.x)
        ok = bool(np.isfinite(res.fun) and res.fun < _PENALTY and (res.success or np.max(np.abs(g)) < opts.grad_tol))
        runs.append((s, res, ok))

    good = [r for r in runs if r[2]]
    if not good:
        raise DidNotConverge(f"none of {len(runs)} starts converged; last status: {runs[-1][1].message}")
    s_best, best, _ = min(good, key=lambda r: (r[1].fun, r[0]))
    theta = best.x
    params = _unpack(theta, k, est_mu)

    H = _num_hessian(grad, theta)
    J = np.ones(theta.size)
    J[k + 1] = params.sigma_sq
    J[k + 2] = params.gamma_var * (1 - params.gamma_var)
    try:
        cov_u = np.linalg.inv(H)
        cov = J[:, None] * cov_u * J[None, :]
        var = np.diag(cov)
        se = np.where(var > 0, np.sqrt(np.abs(var)), np.nan)
    except np.linalg.LinAlgError:
        cov = np.full((theta.size, theta.size), np.nan)
        se = np.full(theta.size, np.nan)
    full_cov = np.full((k + 5, k + 5), np.nan)
    m = theta.size
    full_cov[:m, :m] = cov
    se_mu = se[k + 4] if est_mu else np.nan
    std_errors = SfaParams(se[: k + 1], se[k + 1], se[k + 2], se[k + 3], se_mu)
    return SfaFit(
        params=params,
        loglik=-float(best.fun),
        std_errors=std_errors,
        converged=True,
        n_evals=n_evals,
        covariance=full_cov,
        regressor_names=panel.regressor_names,
        start_index=s_best,
    )


def efficiency_scores(fit: SfaFit, panel: PanelMatrix) -> np.ndarray:
    """Conditional mean ``E[u_it | residuals of region i]``, shape N x T."""
    if not fit.converged:
        raise NotConverged("efficiency scores need a converged fit")
    p = fit.params
    if p.gamma_var == 0:
        return np.zeros((panel.n_regions, panel.n_periods))
    _, w, _, _, _, mu_star, sig_star = _region_terms(p, panel)
    r = mu_star / sig_star
    mills = np.exp(stats.norm.logpdf(r) - log_ndtr(r))
    cond_u = np.maximum(mu_star + sig_star * mills, 0.0)
    return cond_u[:, None] * w[None, :]
