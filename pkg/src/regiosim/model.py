"""Parameters, state and instantaneous growth rates of the N-region model.

State is carried in natural logs. Knowledge growth in region ``i`` is

    g_A_i = c_A * K_i**beta * L_i**gamma * A_i**(theta - 1) * prod_j A_j**(mu_i * w_ij)

and capital growth is ``g_K_i = c_K_i * (A_i * L_i / K_i)**(1 - alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, DivergentRegime, ParameterOutOfRange
from .spatial import SpatialWeights


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    gamma: float
    theta: float
    B: float = 1.0
    a_K: float = 0.1
    a_L: float = 0.1

    @property
    def c_A(self) -> float:
        return self.B * self.a_K**self.beta * self.a_L**self.gamma

    def c_K(self, s: float) -> float:
        return s * (1 - self.a_K) ** self.alpha * (1 - self.a_L) ** (1 - self.alpha)


@dataclass(frozen=True)
class RegionParams:
    mu: float
    s: float
    n: float


@dataclass(frozen=True)
class EconomyConfig:
    params: ModelParams
    regions: tuple
    weights: SpatialWeights

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def mu(self) -> np.ndarray:
        return np.array([r.mu for r in self.regions], dtype=float)

    @property
    def n(self) -> np.ndarray:
        return np.array([r.n for r in self.regions], dtype=float)

    @property
    def c_K(self) -> np.ndarray:
        return np.array([self.params.c_K(r.s) for r in self.regions], dtype=float)

    @property
    def homogeneous(self) -> bool:
        """True when every region shares the same ``mu`` and ``n``."""
        mu, n = self.mu, self.n
        return bool(np.all(mu == mu[0]) and np.all(n == n[0]))

    def with_weights(self, weights: SpatialWeights) -> "EconomyConfig":
        return replace(self, weights=weights)


def _vec(x) -> np.ndarray:
    a = np.array(x, dtype=float).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EconomyState:
    t: float
    ln_A: np.ndarray
    ln_K: np.ndarray
    ln_L: np.ndarray

    def __post_init__(self):
        for name in ("ln_A", "ln_K", "ln_L"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        if not (self.ln_A.size == self.ln_K.size == self.ln_L.size):
            raise DimensionMismatch("state vectors differ in length")

    @property
    def n_regions(self) -> int:
        return self.ln_A.size

    @classmethod
    def from_levels(cls, t, A, K, L) -> "EconomyState":
        return cls(t, np.log(A), np.log(K), np.log(L))

    def levels(self):
        return np.exp(self.ln_A), np.exp(self.ln_K), np.exp(self.ln_L)


@dataclass(frozen=True)
class GrowthRates:
    g_A: np.ndarray
    g_K: np.ndarray


def _check_open(name, value, lo=None, hi=None, lo_open=False, hi_open=False):
    if not math.isfinite(value):
        raise ParameterOutOfRange(f"{name}={value} is not finite")
    if lo is not None and (value < lo or (lo_open and value == lo)):
        raise ParameterOutOfRange(f"{name}={value} violates lower bound {'>' if lo_open else '>='} {lo}")
    if hi is not None and (value > hi or (hi_open and value == hi)):
        raise ParameterOutOfRange(f"{name}={value} violates upper bound {'<' if hi_open else '<='} {hi}")


def validate_config(config: EconomyConfig) -> EconomyConfig:
    """Return ``config`` unchanged if every parameter invariant holds."""
    p = config.params
    _check_open("alpha", p.alpha, 0.0, 1.0, lo_open=True, hi_open=True)
    _check_open("beta", p.beta, 0.0)
    _check_open("gamma", p.gamma, 0.0)
    _check_open("theta", p.theta, 0.0, 1.0, hi_open=True)
    _check_open("B", p.B, 0.0, lo_open=True)
    _check_open("a_K", p.a_K, 0.0, 1.0, hi_open=True)
    _check_open("a_L", p.a_L, 0.0, 1.0, hi_open=True)
    if not p.c_A > 0:
        raise ParameterOutOfRange(f"c_A = B*a_K**beta*a_L**gamma = {p.c_A} must be positive")
    if config.n_regions < 1:
        raise DimensionMismatch("at least one region is required")
    if config.weights.n != config.n_regions:
        raise DimensionMismatch(f"weights are {config.weights.n}x{config.weights.n} for {config.n_regions} regions")
    if not config.weights.standardized:
        raise ParameterOutOfRange("model weights must be row-standardized")
    divergent = []
    for i, r in enumerate(config.regions):
        _check_open(f"regions[{i}].mu", r.mu, 0.0, 1.0, hi_open=True)
        _check_open(f"regions[{i}].s", r.s, 0.0)
        _check_open(f"regions[{i}].n", r.n)
        if not p.c_K(r.s) > 0:
            raise ParameterOutOfRange(f"regions[{i}].s={r.s} gives non-positive c_K")
        if p.beta + p.theta + r.mu >= 1:
            divergent.append(i)
    if divergent:
        sums = {i: p.beta + p.theta + config.regions[i].mu for i in divergent}
        raise DivergentRegime(f"beta + theta + mu >= 1 for regions {sums}", divergent)
    return config


def _check_state(state: EconomyState, config: EconomyConfig):
    if state.n_regions != config.n_regions:
        raise DimensionMismatch(f"state has {state.n_regions} regions, config has {config.n_regions}")


def output(state: EconomyState, config: EconomyConfig) -> np.ndarray:
    """Goods output ``Y_i`` per region."""
    _check_state(state, config)
    p = config.params
    ln_y = p.alpha * (math.log1p(-p.a_K) + state.ln_K) + (1 - p.alpha) * (
        state.ln_A + math.log1p(-p.a_L) + state.ln_L
    )
    return np.exp(ln_y)


def growth_rates(state: EconomyState, config: EconomyConfig) -> GrowthRates:
    _check_state(state, config)
    p = config.params
    spill = config.mu * (config.weights.w @ state.ln_A)
    ln_gA = math.log(p.c_A) + p.beta * state.ln_K + p.gamma * state.ln_L + (p.theta - 1) * state.ln_A + spill
    g_K = config.c_K * np.exp((1 - p.alpha) * (state.ln_A + state.ln_L - state.ln_K))
    return GrowthRates(np.exp(ln_gA), g_K)


def build_config(
    params: ModelParams,
    mu: Sequence[float] | float,
    s: Sequence[float] | float,
    n: Sequence[float] | float,
    weights: SpatialWeights,
) -> EconomyConfig:
    """Convenience constructor broadcasting scalar region parameters."""
    N = weights.n
    mu, s, n = (np.broadcast_to(np.asarray(v, dtype=float), (N,)) for v in (mu, s, n))
    regions = tuple(RegionParams(float(a), float(b), float(c)) for a, b, c in zip(mu, s, n))
    return EconomyConfig(params, regions, weights)
