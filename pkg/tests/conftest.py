import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from regiosim import EconomyState, ModelParams, SpatialWeights, build_config

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_row_stochastic(rng, n, density=1.0):
    """Random nonnegative zero-diagonal W with unit row sums."""
    if n == 1:
        return SpatialWeights(["R1"], np.zeros((1, 1)), standardized=True)
    w = rng.uniform(0.0, 1.0, (n, n))
    if density < 1.0:
        w *= rng.uniform(size=(n, n)) < density
    np.fill_diagonal(w, 0.0)
    for i in range(n):
        if w[i].sum() == 0:
            w[i, (i + 1) % n] = 1.0
    w /= w.sum(axis=1, keepdims=True)
    return SpatialWeights([f"R{i + 1}" for i in range(n)], w, standardized=True)


def random_params(rng):
    beta = rng.uniform(0.02, 0.3)
    theta = rng.uniform(0.1, 0.6)
    return ModelParams(
        alpha=rng.uniform(0.2, 0.6),
        beta=beta,
        gamma=rng.uniform(0.1, 0.5),
        theta=theta,
        B=rng.uniform(0.5, 2.0),
        a_K=rng.uniform(0.05, 0.3),
        a_L=rng.uniform(0.05, 0.3),
    )


def equilibrium_scale(config):
    p = config.params
    return (p.gamma + p.beta) * float(np.mean(config.n)) / (1 - p.theta - p.beta - float(np.mean(config.mu)))


def relaxation_rate(config):
    """Rough inverse time scale of convergence: stability margin times steady growth."""
    p = config.params
    margin = 1 - p.theta - p.beta - float(np.max(config.mu))
    return margin * equilibrium_scale(config)


def random_economy(rng, n_regions, homogeneous=True, min_rate=0.0):
    """Valid random economy, resampled until ``relaxation_rate >= min_rate``."""
    while True:
        config = _draw_economy(rng, n_regions, homogeneous)
        if relaxation_rate(config) >= min_rate:
            return config


def _draw_economy(rng, n_regions, homogeneous):
    p = random_params(rng)
    room = 1.0 - p.beta - p.theta
    if homogeneous:
        mu = rng.uniform(0.05, 0.7) * room
        n = rng.uniform(0.01, 0.05)
    else:
        mu = rng.uniform(0.05, 0.7, n_regions) * room
        n = rng.uniform(0.01, 0.05, n_regions)
    s = rng.uniform(0.1, 0.4, n_regions)
    return build_config(p, mu, s, n, random_row_stochastic(rng, n_regions))


def random_state(rng, n_regions, spread=1.0):
    return EconomyState(
        0.0,
        rng.uniform(-spread, spread, n_regions),
        rng.uniform(-spread, spread, n_regions),
        rng.uniform(-spread, spread, n_regions),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
