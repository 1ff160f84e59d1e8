"""Time integration of the growth system and its equilibrium growth rates."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
import scipy.linalg

from . import _backend
from .errors import DimensionMismatch, DivergentRegime, HeterogeneousMu, InputError, NonFiniteState, ParameterOutOfRange, SingularSystem
from .model import EconomyConfig, EconomyState, GrowthRates, ModelParams, validate_config

DEFAULT_TOL = 1e-8
PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """Recorded states and analytic growth rates; row ``k`` is time ``times[k]``."""

    times: np.ndarray
    ln_A: np.ndarray
    ln_K: np.ndarray
    ln_L: np.ndarray
    g_A: np.ndarray
    g_K: np.ndarray
    early_stop: bool = False

    def __len__(self):
        return self.times.size

    def state(self, k: int) -> EconomyState:
        return EconomyState(float(self.times[k]), self.ln_A[k], self.ln_K[k], self.ln_L[k])

    def rates(self, k: int) -> GrowthRates:
        return GrowthRates(self.g_A[k], self.g_K[k])

    @property
    def final(self) -> EconomyState:
        return self.state(-1)


@dataclass(frozen=True)
class EquilibriumRates:
    g_A_star: np.ndarray
    g_K_star: np.ndarray


def _kernel_args(config: EconomyConfig):
    p = config.params
    return dict(
        W=np.ascontiguousarray(config.weights.w),
        mu=config.mu,
        n=config.n,
        cK=config.c_K,
        ln_cA=math.log(p.c_A),
        alpha=p.alpha,
        beta=p.beta,
        gamma=p.gamma,
        theta=p.theta,
    )


def _run(config, state, dt, n_steps, tol, record_every, backend=None):
    integrate = (backend or _backend.kernels).integrate
    a = _kernel_args(config)
    return integrate(
        state.ln_A, state.ln_K, state.ln_L, a["W"], a["mu"], a["n"], a["cK"], a["ln_cA"],
        a["alpha"], a["beta"], a["gamma"], a["theta"], float(dt), int(n_steps), float(tol), int(record_every),
    )


def step(state: EconomyState, config: EconomyConfig, dt: float) -> EconomyState:
    """One classical RK4 step of the log-state system."""
    if dt < 0 or not math.isfinite(dt):
        raise InputError(f"dt must be a finite nonnegative number, got {dt}")
    if state.n_regions != config.n_regions:
        raise DimensionMismatch("state and config disagree on the number of regions")
    if dt == 0:
        return state
    steps, lnA, lnK, lnL, gA, gK, status = _run(config, state, dt, 1, -1.0, 1)
    if status == 2:
        raise NonFiniteState(f"non-finite state or derivative at t={state.t}")
    return EconomyState(state.t + dt, lnA[-1], lnK[-1], lnL[-1])


def n_steps_for(dt: float, horizon: float) -> int:
    """Number of fixed steps needed to reach ``horizon`` (at least one)."""
    return max(1, math.ceil(horizon / dt - 1e-9))


def simulate(
    config: EconomyConfig,
    initial: EconomyState,
    dt: float,
    horizon: float,
    tol: float = DEFAULT_TOL,
    record_every: int = 1,
    backend=None,
) -> Trajectory:
    """Integrate from ``initial`` until ``t >= initial.t + horizon``.

    Stops early once ``max_i |g_A_i(t) - g_A_i(t - dt)| < tol``; pass
    ``tol=0`` to always run the full horizon.
    """
    if not (dt > 0 and horizon > 0 and tol >= 0) or not all(map(math.isfinite, (dt, horizon, tol))):
        raise InputError(f"need dt > 0, horizon > 0, tol >= 0 (got dt={dt}, horizon={horizon}, tol={tol})")
    validate_config(config)
    if initial.n_regions != config.n_regions:
        raise DimensionMismatch("initial state and config disagree on the number of regions")
    steps, lnA, lnK, lnL, gA, gK, status = _run(
        config, initial, dt, n_steps_for(dt, horizon), tol, record_every, backend
    )
    if status == 2:
        t_bad = initial.t + dt * (int(steps[-1]) + 1)
        raise NonFiniteState(f"state became non-finite near t={t_bad:g}")
    times = np.round(initial.t + dt * steps.astype(float), 10)
    return Trajectory(times, lnA, lnK, lnL, gA, gK, early_stop=status == 1)


def _require_valid(params: ModelParams, mu: float):
    if params.beta + params.theta + mu >= 1:
        raise DivergentRegime(f"beta + theta + mu = {params.beta + params.theta + mu} >= 1")


def equilibrium_solve(config: EconomyConfig) -> EquilibriumRates:
    """Solve ``((1-theta-beta) I - diag(mu) W) g_A = (gamma+beta) n`` by LU."""
    validate_config(config)
    p = config.params
    N = config.n_regions
    M = (1 - p.theta - p.beta) * np.eye(N) - config.mu[:, None] * config.weights.w
    rhs = (p.gamma + p.beta) * config.n
    lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularSystem("equilibrium system is numerically singular; this should not happen for a valid config")
    g_A = scipy.linalg.lu_solve((lu, piv), rhs)
    return EquilibriumRates(g_A, g_A + config.n)


def equilibrium_closed_form(params: ModelParams, mu: float, n: float) -> tuple[float, float]:
    """Common steady growth rates ``(g_A*, g_K*)`` for homogeneous ``mu`` and ``n``."""
    _require_valid(params, mu)
    if n < 0:
        raise ParameterOutOfRange(f"n must be nonnegative, got {n}")
    g_A = (params.gamma + params.beta) * n / (1 - params.theta - params.beta - mu)
    return g_A, g_A + n


def equilibrium_closed_form_gk(params: ModelParams, mu: float, n: float) -> float:
    """``g_K*`` written as ``(1-theta-mu+gamma) n / (1-theta-beta-mu)``."""
    _require_valid(params, mu)
    return (1 - params.theta - mu + params.gamma) * n / (1 - params.theta - params.beta - mu)


def equilibrium_two_region(params: ModelParams, n1: float, n2: float, mu1: float, mu2: float) -> EquilibriumRates:
    """Closed-form equilibrium of two regions that only see each other."""
    for mu in (mu1, mu2):
        if mu < 0:
            raise ParameterOutOfRange(f"mu must be nonnegative, got {mu}")
        _require_valid(params, mu)
    a = 1 - params.theta - params.beta
    den = a * a - mu1 * mu2
    scale = params.gamma + params.beta
    g1 = (a * n1 + mu1 * n2) / den * scale
    g2 = (a * n2 + mu2 * n1) / den * scale
    return EquilibriumRates(np.array([g1, g2]), np.array([g1 + n1, g2 + n2]))


def neumann_equilibrium(config: EconomyConfig, r_max: int) -> np.ndarray:
    """Partial sum of order ``r_max`` of the power series in ``W``.

    Evaluates the matrix powers explicitly rather than summing the geometric
    series, so it stands as an independent route to ``g_A*``.
    """
    validate_config(config)
    if r_max < 0:
        raise InputError(f"r_max must be nonnegative, got {r_max}")
    mu = config.mu
    if not np.all(mu == mu[0]):
        raise HeterogeneousMu("the power-series form holds only for a common mu")
    p = config.params
    a = 1 - p.theta - p.beta
    ratio = mu[0] / a
    n = config.n
    W = config.weights.w
    Wr = np.eye(config.n_regions)
    total = n.copy()
    for r in range(1, r_max + 1):
        Wr = Wr @ W
        total = total + ratio**r * (Wr @ n)
    return (p.gamma + p.beta) / a * total


def neumann_tail_bound(config: EconomyConfig, r_max: int) -> np.ndarray:
    """Upper bound on ``|g_A* - partial sum|`` for a (sub)stochastic ``W``."""
    p = config.params
    a = 1 - p.theta - p.beta
    ratio = config.mu[0] / a
    lead = (p.gamma + p.beta) * float(np.max(np.abs(config.n))) / a
    return np.full(config.n_regions, lead * ratio ** (r_max + 1) / (1 - ratio))


def neumann_order_for(config: EconomyConfig, tol: float = 1e-12, cap: int = 100_000) -> int:
    """Smallest truncation order whose tail bound is below ``tol``."""
    p = config.params
    a = 1 - p.theta - p.beta
    ratio = config.mu[0] / a
    lead = (p.gamma + p.beta) * float(np.max(np.abs(config.n))) / a
    if ratio == 0 or lead == 0:
        return 0
    r = math.log(tol * (1 - ratio) / lead) / math.log(ratio) - 1
    return int(min(cap, max(0, math.ceil(r))))


def parameter_sweep(fn: Callable, items: Iterable, max_workers: int = 1) -> list:
    """Map ``fn`` over ``items`` preserving order, serially or on a thread pool."""
    items = list(items)
    if max_workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers) as ex:
        return list(ex.map(fn, items))
