import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regiosim import EconomyState, ModelParams, SpatialWeights, build_config, equilibrium_closed_form
from regiosim.errors import (
    DimensionMismatch,
    InputError,
    NonPositive,
    NonPositiveInitialGrowth,
    ParameterOutOfRange,
    SchemaError,
    TooFewRegions,
    UnbalancedPanel,
    ZeroResponse,
)
from regiosim.paneldata import (
    DEFAULT_TAU,
    GrowthPanel,
    RawPanel,
    build_regression_panel,
    compute_stocks,
    geometric_growth,
    growth_rates_empirical,
    knowledge_stock,
    load_raw,
    nested_band_models,
    panel_from_frame,
    panel_to_frame,
    perpetual_inventory,
    real_expense,
    sigma_series,
    synth_band_panel,
    synth_dynamics,
    synth_linear_panel,
    write_raw,
)

from conftest import random_row_stochastic


def _growing(rng, low, high, N, T):
    return rng.uniform(low, high, (N, 1)) * np.cumprod(rng.uniform(0.97, 1.15, (N, T)), axis=1)


def _raw(rng, N=3, T=5):
    return RawPanel(
        [f"P{i}" for i in range(N)],
        2000 + np.arange(T),
        _growing(rng, 10, 100, N, T),
        _growing(rng, 50, 500, N, T),
        rng.uniform(1, 20, (N, T)),
        np.cumprod(rng.uniform(1.0, 1.1, (N, T)), axis=1) / rng.uniform(1.0, 1.1, (N, 1)),
    )


def _csv(tmp_path, rows, name="raw.csv"):
    path = tmp_path / name
    path.write_text("region,year,patents,rnd_expense,personnel,deflator\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))
    return path


# ingestion


def test_load_well_formed_file(tmp_path):
    rows = [(r, y, 10 + y - 2000, 100.0, 5, 1.0) for r in ("A", "B", "C") for y in range(2000, 2004)]
    raw = load_raw(_csv(tmp_path, rows))
    assert raw.n_rows == 12
    assert raw.regions == ("A", "B", "C")
    assert raw.years.tolist() == [2000, 2001, 2002, 2003]
    assert raw.patents[1].tolist() == [10, 11, 12, 13]


def test_load_reports_gaps_and_bad_values(tmp_path):
    rows = [(r, y, 1, 1, 1, 1) for r in ("A", "B") for y in range(2000, 2003) if (r, y) != ("B", 2001)]
    with pytest.raises(UnbalancedPanel, match=r"'B'.*2001"):
        load_raw(_csv(tmp_path, rows))
    rows = [(r, y, 1, 1, 0 if (r, y) == ("A", 2001) else 1, 1) for r in ("A", "B") for y in range(2000, 2003)]
    with pytest.raises(NonPositive, match="row 3"):
        load_raw(_csv(tmp_path, rows))
    rows = [("A", 2000, "many", 1, 1, 1), ("A", 2001, 1, 1, 1, 1)]
    with pytest.raises(SchemaError, match="row 2"):
        load_raw(_csv(tmp_path, rows))
    with pytest.raises(SchemaError):
        load_raw(_csv(tmp_path, [("A", 2000, 1, 1, 1, 1), ("A", 2000, 1, 1, 1, 1)]))
    (tmp_path / "short.csv").write_text("region,year,patents\nA,2000,1\n")
    with pytest.raises(SchemaError, match="missing"):
        load_raw(tmp_path / "short.csv")


def test_raw_round_trip_is_exact(tmp_path, rng):
    raw = _raw(rng)
    back = load_raw(write_raw(raw, tmp_path / "r.csv"))
    for name in ("patents", "rnd_expense", "personnel", "deflator"):
        np.testing.assert_array_equal(getattr(back, name), getattr(raw, name))
    assert back.regions == raw.regions


# deflation and stocks


def test_real_expense(rng):
    raw = _raw(rng)
    unit = RawPanel(raw.regions, raw.years, raw.patents, raw.rnd_expense, raw.personnel, np.ones_like(raw.deflator))
    np.testing.assert_array_equal(real_expense(unit), raw.rnd_expense)
    doubled = RawPanel(raw.regions, raw.years, raw.patents, raw.rnd_expense, raw.personnel, 2 * raw.deflator)
    np.testing.assert_allclose(real_expense(doubled), real_expense(raw) / 2, rtol=1e-15)
    for i in range(3):
        for t in range(5):
            assert real_expense(raw)[i, t] == raw.rnd_expense[i, t] / raw.deflator[i, t]


def test_perpetual_inventory_hand_example():
    np.testing.assert_allclose(perpetual_inventory([100.0, 110.0, 121.0], 0.10), [500.0, 560.0, 625.0], rtol=1e-14)


def test_pure_depreciation_after_first_year():
    K = perpetual_inventory([80.0, 0, 0, 0, 0], 0.1, initial_growth=0.1)
    np.testing.assert_allclose(K, 400.0 * 0.9 ** np.arange(5), rtol=1e-14)
    with pytest.raises(NonPositiveInitialGrowth):
        perpetual_inventory([80.0, 0, 0, 0, 0], 0.1)


def test_full_depreciation(rng):
    R = rng.uniform(1, 10, 6)
    K = perpetual_inventory(R, 1.0)
    np.testing.assert_array_equal(K[1:], R[1:])


def test_knowledge_depreciation_default():
    assert abs(DEFAULT_TAU - 1 / 14) < 1e-3


def test_constant_patents_fixed_point():
    A = knowledge_stock(np.full(40, 7.0))
    np.testing.assert_allclose(A, 7.0 / DEFAULT_TAU, rtol=1e-13)


def test_stock_matches_spreadsheet_recursion(rng):
    for _ in range(10):
        flows = rng.uniform(1, 50, int(rng.integers(3, 15))).tolist()
        rate = float(rng.uniform(0.02, 0.3))
        g = (flows[-1] / flows[0]) ** (1 / (len(flows) - 1)) - 1
        if g + rate <= 0:
            continue
        cells = [flows[0] / (g + rate)]
        for f in flows[1:]:
            cells.append(cells[-1] * (1 - rate) + f)
        np.testing.assert_allclose(perpetual_inventory(flows, rate), cells, rtol=1e-13)


def test_growth_span_subset(rng):
    flows = rng.uniform(5, 10, (2, 8))
    g = geometric_growth(flows, (2, 5))
    np.testing.assert_allclose(g, (flows[:, 5] / flows[:, 2]) ** (1 / 3) - 1, rtol=1e-14)
    raw = _raw(rng, 2, 8)
    stocks = compute_stocks(raw, growth_span=(2002, 2005))
    np.testing.assert_allclose(stocks.k_r, perpetual_inventory(real_expense(raw), 0.1, (2, 5)), rtol=1e-15)
    with pytest.raises(InputError):
        compute_stocks(raw, growth_span=(1990, 2005))
    with pytest.raises(ParameterOutOfRange):
        perpetual_inventory(flows, 1.5)


@given(st.integers(0, 100_000), st.floats(0.01, 1000.0))
def test_stocks_positive_and_linear(seed, c):
    rng = np.random.default_rng(seed)
    flows = _growing(rng, 0.5, 100, 3, int(rng.integers(2, 12)))
    rate = float(rng.uniform(0.05, 1.0))
    S = perpetual_inventory(flows, rate)
    assert np.all(S > 0)
    np.testing.assert_allclose(perpetual_inventory(c * flows, rate), c * S, rtol=1e-12)


def test_zero_initial_flow_yields_nonpositive(rng):
    raw = _raw(rng)
    P = np.array(raw.patents)
    P[0, 0] = 0.0
    bad = RawPanel(raw.regions, raw.years, P, raw.rnd_expense, raw.personnel, raw.deflator)
    with pytest.raises((NonPositive, NonPositiveInitialGrowth)):
        compute_stocks(bad)


# regression panels


def test_regression_panel_layout(rng):
    raw = _raw(rng, 4, 6)
    stocks = compute_stocks(raw)
    W = random_row_stochastic(rng, 4)
    W = SpatialWeights(raw.regions, W.w, standardized=True)
    one = build_regression_panel(raw, stocks, W)
    assert one.regressor_names == ("lnKr", "lnLr", "lnA", "wlnA")
    assert one.years.tolist() == raw.years[:-1].tolist()
    np.testing.assert_allclose(one.y, np.log(raw.patents[:, 1:]), rtol=1e-15)
    np.testing.assert_allclose(one.X[:, :, 3], W.w @ np.log(stocks.a[:, :-1]), rtol=1e-15)
    five = build_regression_panel(raw, stocks, [W] * 5)
    assert five.k == 8
    assert five.regressor_names[3:] == ("w1lnA", "w2lnA", "w3lnA", "w4lnA", "w5lnA")


def test_swap_matrix_spillover_is_neighbour(rng):
    raw = _raw(rng, 2, 4)
    stocks = compute_stocks(raw)
    W = SpatialWeights(raw.regions, [[0, 1.0], [1.0, 0]], standardized=True)
    panel = build_regression_panel(raw, stocks, W)
    np.testing.assert_array_equal(panel.X[0, :, 3], np.log(stocks.a[1, :-1]))


@given(st.integers(0, 100_000), st.floats(-5, 5))
def test_spillover_shifts_with_common_log_shift(seed, c):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, 7))
    raw = _raw(rng, N, 4)
    stocks = compute_stocks(raw)
    W = SpatialWeights(raw.regions, random_row_stochastic(rng, N).w, standardized=True)
    base = build_regression_panel(raw, stocks, W)
    shifted = type(stocks)(stocks.regions, stocks.years, stocks.k_r, stocks.a * np.exp(c))
    moved = build_regression_panel(raw, shifted, W)
    np.testing.assert_allclose(moved.X[:, :, 3] - base.X[:, :, 3], c, rtol=0, atol=1e-12)


def test_zero_patent_policy(rng):
    raw = _raw(rng, 2, 4)
    P = np.array(raw.patents)
    P[1, 2] = 0.0
    zero = RawPanel(raw.regions, raw.years, P, raw.rnd_expense, raw.personnel, raw.deflator)
    stocks = compute_stocks(zero)
    with pytest.raises(ZeroResponse, match="P1.*2002"):
        build_regression_panel(zero, stocks, SpatialWeights.uniform(raw.regions))
    panel = build_regression_panel(zero, stocks, SpatialWeights.uniform(raw.regions), zero_patents="log1p")
    assert panel.y[1, 1] == 0.0
    with pytest.raises(InputError):
        build_regression_panel(zero, stocks, SpatialWeights.uniform(raw.regions), zero_patents="drop")


def test_weight_dimension_checked(rng):
    raw = _raw(rng, 3, 4)
    with pytest.raises(DimensionMismatch):
        build_regression_panel(raw, compute_stocks(raw), SpatialWeights.uniform(["a", "b"]))


def test_regression_panel_frame_round_trip(rng):
    raw = _raw(rng, 3, 5)
    panel = build_regression_panel(raw, compute_stocks(raw), SpatialWeights.uniform(raw.regions))
    back = panel_from_frame(panel_to_frame(panel))
    np.testing.assert_array_equal(back.X, panel.X)
    np.testing.assert_array_equal(back.y, panel.y)
    assert back.regressor_names == panel.regressor_names
    with pytest.raises(SchemaError):
        panel_from_frame(pd.DataFrame({"region": ["a"], "year": [1]}))


# growth and sigma convergence


def test_empirical_growth_examples(rng):
    g = growth_rates_empirical([[0, 10.0]], [[100.0, 1.0]])
    assert g.g[0, 0] == pytest.approx(0.1)
    zero = growth_rates_empirical(np.zeros((2, 4)), np.ones((2, 4)))
    assert not zero.g.any()
    P, A = rng.uniform(0, 5, (4, 6)), rng.uniform(1, 50, (4, 6))
    np.testing.assert_array_equal(growth_rates_empirical(P, A).g, P[:, 1:] / A[:, :-1])


def test_sigma_series_examples(rng):
    s = sigma_series(GrowthPanel(("a", "b"), np.array([1]), np.array([[0.1], [0.3]])))
    assert s.mean_g[0] == pytest.approx(0.2, rel=1e-15)
    assert s.sigma[0] == pytest.approx(0.1, rel=1e-14)
    flat = sigma_series(GrowthPanel(("a", "b", "c"), np.arange(3), np.full((3, 3), 0.05)))
    assert not flat.sigma.any()
    G = rng.normal(0.05, 0.02, (9, 7))
    s = sigma_series(GrowthPanel(tuple("abcdefghi"), np.arange(7), G))
    for t in range(7):
        col = G[:, t].tolist()
        mean = sum(col) / len(col)
        sd = (sum((x - mean) ** 2 for x in col) / len(col)) ** 0.5
        assert abs(s.mean_g[t] - mean) <= 1e-14 and abs(s.sigma[t] - sd) <= 1e-14
    with pytest.raises(TooFewRegions):
        sigma_series(GrowthPanel(("a",), np.arange(2), np.ones((1, 2))))


# synthetic generators


def _economy(mu, n):
    p = ModelParams(alpha=0.35, beta=0.1, gamma=0.3, theta=0.1, a_K=0.2, a_L=0.2)
    W = SpatialWeights.uniform(["A", "B", "C"])
    return build_config(p, mu, 0.25, n, W)


def test_synthetic_dynamics_layout_and_determinism(tmp_path):
    config = _economy(0.2, 0.03)
    start = EconomyState(0.0, [0.0, 0.5, -0.5], [0.0, 0.2, 0.1], [0.0, 0.0, 0.1])
    a = synth_dynamics(config, start, 0.05, 10, obs_noise_sd=0.1, seed=4)
    b = synth_dynamics(config, start, 0.05, 10, obs_noise_sd=0.1, seed=4)
    assert a.years.tolist() == list(range(2001, 2011))
    assert write_raw(a, tmp_path / "a.csv").read_bytes() == write_raw(b, tmp_path / "b.csv").read_bytes()
    c = synth_dynamics(config, start, 0.05, 10, obs_noise_sd=0.1, seed=5)
    assert not np.array_equal(a.patents, c.patents)
    with pytest.raises(InputError):
        synth_dynamics(config, start, 0.3, 10)


def test_noise_free_growth_spread_vanishes():
    config = _economy(0.2, 0.03)
    start = EconomyState(0.0, [0.0, 1.0, -1.0], [0.0, 0.5, -0.5], [0.0, 0.0, 0.0])
    raw = synth_dynamics(config, start, 0.05, 300)
    A = knowledge_stock(raw.patents, tau=0.0)
    sig = sigma_series(growth_rates_empirical(raw.patents, A)).sigma
    # the rebuilt stock has a start-up transient, so the spread peaks before it decays
    peak = int(np.argmax(sig))
    assert peak < 50
    assert np.all(np.diff(sig[peak:]) <= 0)
    assert sig[-1] < 1e-2 * sig[peak]


def test_isolated_regions_reach_own_limits():
    # with mu = 0 the approach runs at roughly (1 - theta - beta) g*, so n sets the time scale
    n = np.array([0.06, 0.08, 0.1])
    config = _economy(0.0, n)
    start = EconomyState(0.0, [0.0, 0.3, -0.3], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    raw = synth_dynamics(config, start, 0.05, 400)
    g = growth_rates_empirical(raw.patents, knowledge_stock(raw.patents, tau=0.0)).g[:, -1]
    limits = np.array([equilibrium_closed_form(config.params, 0.0, x)[0] for x in n])
    # annual sampling turns a continuous rate g into the discrete rate e^g - 1
    np.testing.assert_allclose(np.log1p(g), limits, rtol=1e-3)


def test_band_panel_generator():
    panel = synth_band_panel(seed=3)
    assert panel.k == 8 and panel.n_regions == 30 and panel.n_periods == 15
    assert panel.regressor_names[3:] == ("w1lnA", "w2lnA", "w3lnA", "w4lnA", "w5lnA")
    again = synth_band_panel(seed=3)
    np.testing.assert_array_equal(again.X, panel.X)
    models = nested_band_models()
    assert [len(m) for m in models] == [8, 7, 6, 5, 4]
    assert models[-1] == ("lnKr", "lnLr", "lnA", "w1lnA")


def test_linear_generator_shapes():
    panel = synth_linear_panel(7, 4, beta=(1.0, 2.0, 3.0), seed=1)
    assert panel.X.shape == (7, 4, 3)
    with pytest.raises(ParameterOutOfRange):
        synth_linear_panel(1, 4)
