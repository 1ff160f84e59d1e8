import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from regiosim.econometrics import PanelMatrix, SfaOptions, SfaParams, efficiency_scores, ols, sfa_fit, sfa_loglik
from regiosim.econometrics.sfa import _pack, _unpack, decay_weights, sfa_loglik_by_region
from regiosim.errors import DidNotConverge, InputError, NotConverged, ParameterOutOfRange
from regiosim.paneldata import synth_sfa, truncnorm_mean

TRUE = SfaParams([1.0, 0.4, 0.3], sigma_sq=0.5, gamma_var=0.6, eta=0.02, mu_trunc=0.3)


def _random_panel(rng, N, T, k=2):
    return PanelMatrix(
        [f"r{i}" for i in range(N)], 2000 + np.arange(T), rng.normal(size=(N, T)), rng.normal(size=(N, T, k)), [f"x{j}" for j in range(k)]
    )


def _random_params(rng, k=2):
    return SfaParams(
        rng.normal(size=k + 1), float(rng.uniform(0.2, 2.0)), float(rng.uniform(0.05, 0.95)), float(rng.uniform(-0.2, 0.2)), float(rng.uniform(-1, 1))
    )


def _region_integrand(params, panel, i):
    """Joint density of region i's residuals and its inefficiency level u."""
    e = panel.y[i] - params.beta[0] - panel.X[i] @ params.beta[1:]
    w = decay_weights(panel, params.eta)
    sv, su = math.sqrt(params.sigma_v_sq), math.sqrt(params.sigma_u_sq)
    mass = stats.norm.cdf(params.mu_trunc / su)

    def f(u):
        noise = np.prod(stats.norm.pdf((e + w * u) / sv) / sv)
        return noise * stats.norm.pdf((u - params.mu_trunc) / su) / su / mass

    return f, w


def _quad(f, upper):
    return integrate.quad(f, 0.0, upper, epsabs=0, epsrel=1e-12, limit=400)[0]


def test_loglik_matches_quadrature(rng):
    for _ in range(6):
        panel = _random_panel(rng, 2, 2)
        params = _random_params(rng)
        total = 0.0
        for i in range(2):
            f, _w = _region_integrand(params, panel, i)
            total += math.log(_quad(f, params.mu_trunc + 40 * math.sqrt(params.sigma_u_sq) + 40))
        assert sfa_loglik(params, panel) == pytest.approx(total, abs=1e-6)


def test_conditional_mean_matches_quadrature(rng):
    panel = _random_panel(rng, 2, 3)
    params = _random_params(rng)
    fit = _fake_fit(params)
    scores = efficiency_scores(fit, panel)
    for i in range(2):
        f, w = _region_integrand(params, panel, i)
        upper = params.mu_trunc + 40 * math.sqrt(params.sigma_u_sq) + 40
        mean_u = _quad(lambda u: u * f(u), upper) / _quad(f, upper)
        np.testing.assert_allclose(scores[i], mean_u * w, rtol=0, atol=1e-6)


def _fake_fit(params, converged=True):
    from regiosim.econometrics import SfaFit

    return SfaFit(params, 0.0, params, converged, 0)


def test_no_inefficiency_limit_is_gaussian(rng):
    panel = _random_panel(rng, 4, 5)
    # u collapses onto mu_trunc as sigma_u -> 0, so the Gaussian limit needs mu_trunc = 0
    y, X = panel.stacked()
    beta = ols(y, np.column_stack([np.ones(y.size), X])).coefficients
    params = SfaParams(beta, 0.8, 1e-10, 0.05, 0.0)
    resid = panel.y - params.beta[0] - panel.X @ params.beta[1:]
    gauss = float(np.sum(stats.norm.logpdf(resid, scale=math.sqrt(params.sigma_sq))))
    assert abs(sfa_loglik(params, panel) - gauss) < 1e-4
    exact_zero = dataclasses.replace(params, gamma_var=0.0)
    assert sfa_loglik(exact_zero, panel) == pytest.approx(gauss, rel=1e-12)


def test_zero_decay_ignores_period_order(rng):
    panel = _random_panel(rng, 5, 6)
    params = dataclasses.replace(_random_params(rng), eta=0.0)
    order = rng.permutation(6)
    shuffled = PanelMatrix(panel.region_ids, panel.years, panel.y[:, order], panel.X[:, order], panel.regressor_names)
    assert sfa_loglik(params, shuffled) == pytest.approx(sfa_loglik(params, panel), rel=1e-13)
    np.testing.assert_array_equal(decay_weights(panel, 0.0), 1.0)


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_loglik_invariant_to_region_order(seed):
    rng = np.random.default_rng(seed)
    panel = _random_panel(rng, int(rng.integers(2, 30)), int(rng.integers(2, 8)))
    params = _random_params(rng)
    order = rng.permutation(panel.n_regions)
    assert sfa_loglik(params, panel.permute_regions(order)) == sfa_loglik(params, panel)


def test_parameter_validation():
    with pytest.raises(ParameterOutOfRange):
        SfaParams([0, 1], 0.0, 0.5).validate()
    with pytest.raises(ParameterOutOfRange):
        SfaParams([0, 1], 1.0, 1.0).validate()


@pytest.fixture(scope="module")
def synthetic_fit():
    panel = synth_sfa(TRUE, 100, 15, seed=3)
    return panel, sfa_fit(panel, n_starts=3, seed=1)


def test_fit_beats_true_parameters(synthetic_fit):
    panel, fit = synthetic_fit
    assert fit.converged
    assert fit.loglik >= sfa_loglik(TRUE, panel)
    assert fit.params.eta > 0


def test_fit_is_a_local_optimum(synthetic_fit):
    panel, fit = synthetic_fit
    theta = _pack(fit.params, True)
    k = panel.k
    for i in range(theta.size):
        for h in (-1e-3, 1e-3):
            moved = theta.copy()
            moved[i] += h
            assert sfa_loglik(_unpack(moved, k, True), panel) <= fit.loglik + 1e-9


def test_fit_reports_standard_errors(synthetic_fit):
    _, fit = synthetic_fit
    se = fit.se_vector()
    assert np.all(se > 0)
    assert fit.names == ["const", "x1", "x2", "sigma_sq", "gamma_var", "eta", "mu_trunc"]
    cov = fit.covariance
    np.testing.assert_allclose(cov, cov.T, rtol=1e-12)


def test_fit_is_deterministic(synthetic_fit):
    panel, fit = synthetic_fit
    again = sfa_fit(panel, n_starts=3, seed=1)
    np.testing.assert_array_equal(again.vector(), fit.vector())
    assert again.loglik == fit.loglik


def test_efficiency_decays_when_eta_positive(synthetic_fit):
    panel, fit = synthetic_fit
    scores = efficiency_scores(fit, panel)
    assert np.all(scores >= 0)
    assert np.all(np.diff(scores, axis=1) <= 0)


def test_no_inefficiency_collapses_to_ols():
    truth = SfaParams([1.0, 0.4, 0.3], sigma_sq=0.3, gamma_var=0.0)
    panel = synth_sfa(truth, 60, 8, seed=4)
    # with a free truncation mean the no-inefficiency point is not identified
    fit = sfa_fit(panel, n_starts=2, seed=0, estimate_mu_trunc=False)
    y, X = panel.stacked()
    ref = ols(y, np.column_stack([np.ones(y.size), X]))
    gauss_ll = float(np.sum(stats.norm.logpdf(ref.residuals, scale=math.sqrt(ref.residuals @ ref.residuals / y.size))))
    # gamma_var and eta are the extra frontier parameters
    assert 2 * (fit.loglik - gauss_ll) < stats.chi2.ppf(0.99, 2)
    assert fit.params.gamma_var <= 0.15
    slopes_fit, slopes_ols = fit.params.beta[1:], ref.coefficients[1:]
    assert np.all(np.abs(slopes_fit - slopes_ols) <= 2 * np.sqrt(np.diag(ref.covariance))[1:])
    scores = efficiency_scores(fit, panel)
    assert np.median(scores) < 0.1


def test_fit_failures(rng):
    panel = synth_sfa(TRUE, 30, 5, seed=2)
    with pytest.raises(DidNotConverge):
        sfa_fit(panel, SfaOptions(max_iter=1, n_starts=1))
    with pytest.raises(InputError):
        sfa_fit(panel, bogus=1)
    with pytest.raises(NotConverged):
        efficiency_scores(_fake_fit(TRUE, converged=False), panel)
    short = PanelMatrix(["a", "b"], [2000], [[0.0], [1.0]], [[[1.0]], [[2.0]]], ["x"])
    with pytest.raises(InputError):
        sfa_fit(short)


def test_synthetic_inefficiency_distribution():
    truth = SfaParams([0.0, 1.0], sigma_sq=1.0, gamma_var=0.5, eta=0.1, mu_trunc=-0.2)
    _, ineff = synth_sfa(truth, 10_000, 3, seed=9, return_inefficiency=True)
    u = ineff[:, -1]
    su = math.sqrt(truth.sigma_u_sq)
    assert abs(u.mean() - truncnorm_mean(truth.mu_trunc, su)) < 4 * u.std() / math.sqrt(u.size)
    assert np.all(u >= 0)
    assert np.all(np.diff(ineff, axis=1) < 0)


def test_synthetic_without_inefficiency(rng):
    truth = SfaParams([0.5, 1.0], sigma_sq=0.4, gamma_var=0.0)
    _, ineff = synth_sfa(truth, 20, 4, seed=1, return_inefficiency=True)
    assert not ineff.any()
    a = synth_sfa(truth, 20, 4, seed=1)
    b = synth_sfa(truth, 20, 4, seed=1)
    np.testing.assert_array_equal(a.y, b.y)


def test_region_terms_sum_to_total(rng):
    panel = _random_panel(rng, 7, 4)
    params = _random_params(rng)
    assert math.fsum(sfa_loglik_by_region(params, panel)) == sfa_loglik(params, panel)
