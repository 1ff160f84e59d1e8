"""Raw panel ingestion, stock construction, regression panels and synthetic data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .dynamics import simulate
from .econometrics.panel import PanelMatrix
from .econometrics.sfa import SfaParams, decay_weights
from .errors import (
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
from .model import EconomyConfig, EconomyState
from .spatial import Coordinates, SpatialWeights, band_partition, haversine_distances, inverse_square_weights, row_standardize

RAW_COLUMNS = ("region", "year", "patents", "rnd_expense", "personnel", "deflator")
DEFAULT_DELTA = 0.10
DEFAULT_TAU = 0.0714


def _ro(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RawPanel:
    """Balanced region-by-year observations; every array is N x T."""

    regions: tuple
    years: np.ndarray
    patents: np.ndarray
    rnd_expense: np.ndarray
    personnel: np.ndarray
    deflator: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(str(r) for r in self.regions))
        object.__setattr__(self, "years", np.asarray(self.years, dtype=int))
        shape = (len(self.regions), self.years.size)
        for name in ("patents", "rnd_expense", "personnel", "deflator"):
            a = _ro(getattr(self, name))
            if a.shape != shape:
                raise DimensionMismatch(f"{name} has shape {a.shape}, expected {shape}")
            object.__setattr__(self, name, a)

    @property
    def n_rows(self) -> int:
        return len(self.regions) * self.years.size

    def to_frame(self) -> pd.DataFrame:
        N, T = len(self.regions), self.years.size
        return pd.DataFrame(
            {
                "region": np.repeat(self.regions, T),
                "year": np.tile(self.years, N),
                "patents": self.patents.reshape(-1),
                "rnd_expense": self.rnd_expense.reshape(-1),
                "personnel": self.personnel.reshape(-1),
                "deflator": self.deflator.reshape(-1),
            }
        )


@dataclass(frozen=True)
class StockSeries:
    regions: tuple
    years: np.ndarray
    k_r: np.ndarray
    a: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        N, T = len(self.regions), self.years.size
        return pd.DataFrame(
            {
                "region": np.repeat(self.regions, T),
                "year": np.tile(self.years, N),
                "k_r": self.k_r.reshape(-1),
                "a": self.a.reshape(-1),
            }
        )


@dataclass(frozen=True)
class GrowthPanel:
    regions: tuple
    years: np.ndarray
    g: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        N, T = len(self.regions), self.years.size
        return pd.DataFrame({"region": np.repeat(self.regions, T), "year": np.tile(self.years, N), "g": self.g.reshape(-1)})


@dataclass(frozen=True)
class SigmaSeries:
    years: np.ndarray
    mean_g: np.ndarray
    sigma: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"year": self.years, "mean_g": self.mean_g, "sigma": self.sigma})


def raw_from_frame(df: pd.DataFrame, source: str = "<frame>") -> RawPanel:
    """Validate a long-format frame and pivot it into a :class:`RawPanel`."""
    missing = [c for c in RAW_COLUMNS if c not in df.columns]
    if missing:
        raise SchemaError(f"{source}: missing columns {missing}", [f"column {c} missing" for c in missing])
    df = df.copy()
    problems = []
    df["region"] = df["region"].astype(str)
    for col in RAW_COLUMNS[1:]:
        conv = pd.to_numeric(df[col], errors="coerce")
        for idx in np.flatnonzero(conv.isna().to_numpy()):
            # +2: header line and 1-based numbering
            problems.append(f"row {idx + 2}: column {col!r} value {df[col].iloc[idx]!r} is not numeric")
        df[col] = conv
    if problems:
        raise SchemaError(f"{source}: {len(problems)} malformed cell(s); first: {problems[0]}", problems)
    if np.any(df["year"] != np.round(df["year"])):
        raise SchemaError(f"{source}: year must be an integer")
    df["year"] = df["year"].astype(int)
    dup = df.duplicated(["region", "year"])
    if dup.any():
        i = int(np.flatnonzero(dup.to_numpy())[0])
        raise SchemaError(f"{source}: duplicate (region, year) at row {i + 2}")

    for col, strict in (("personnel", True), ("deflator", True), ("patents", False), ("rnd_expense", False)):
        bad = df[col] <= 0 if strict else df[col] < 0
        if bad.any():
            i = int(np.flatnonzero(bad.to_numpy())[0])
            rel = ">" if strict else ">="
            raise NonPositive(f"{source}: row {i + 2} ({df['region'].iloc[i]}, {df['year'].iloc[i]}): {col} must be {rel} 0")

    regions = list(dict.fromkeys(df["region"]))
    years = np.arange(df["year"].min(), df["year"].max() + 1)
    have = set(zip(df["region"], df["year"]))
    for r in regions:
        for y in years:
            if (r, int(y)) not in have:
                raise UnbalancedPanel(f"{source}: region {r!r} has no row for year {int(y)}")
    df = df.set_index(["region", "year"]).loc[pd.MultiIndex.from_product([regions, years])]
    shape = (len(regions), years.size)
    arrays = {c: df[c].to_numpy(dtype=float).reshape(shape) for c in RAW_COLUMNS[2:]}
    return RawPanel(regions, years, **arrays)


def load_raw(path) -> RawPanel:
    """Read and validate a raw panel CSV."""
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype={"region": str}, encoding="utf-8", float_precision="round_trip")
    except (pd.errors.ParserError, UnicodeDecodeError, pd.errors.EmptyDataError) as exc:
        raise SchemaError(f"{path}: cannot parse CSV ({exc})") from exc
    return raw_from_frame(df, str(path))


def write_raw(raw: RawPanel, path) -> Path:
    path = Path(path)
    raw.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def real_expense(raw: RawPanel) -> np.ndarray:
    """R&D expense deflated to first-year prices."""
    return raw.rnd_expense / raw.deflator


def geometric_growth(flows: np.ndarray, span: tuple[int, int] | None = None) -> np.ndarray:
    """Per-row geometric mean growth rate between column positions ``span``."""
    flows = np.atleast_2d(np.asarray(flows, dtype=float))
    a, b = span if span is not None else (0, flows.shape[1] - 1)
    if not 0 <= a < b < flows.shape[1]:
        raise InputError(f"growth span {span} needs two distinct periods inside the panel")
    with np.errstate(divide="ignore", invalid="ignore"):
        return (flows[:, b] / flows[:, a]) ** (1.0 / (b - a)) - 1.0


def _span_positions(years, growth_span):
    if growth_span is None:
        return None
    y0, y1 = growth_span
    years = list(np.asarray(years))
    try:
        return years.index(y0), years.index(y1)
    except ValueError:
        raise InputError(f"growth span {growth_span} is outside the panel years") from None


def perpetual_inventory(flows, rate: float, span: tuple[int, int] | None = None, initial_growth=None) -> np.ndarray:
    """Stock recursion ``S(t) = (1 - rate) S(t-1) + flow(t)``.

    The initial stock is ``flow(0) / (g + rate)`` with ``g`` the geometric mean
    growth of the flows over column positions ``span`` (whole series by
    default) unless ``initial_growth`` supplies it.
    """
    F = np.asarray(flows, dtype=float)
    one_d = F.ndim == 1
    F = np.atleast_2d(F)
    if not 0 <= rate <= 1:
        raise ParameterOutOfRange(f"depreciation rate must lie in [0, 1], got {rate}")
    g = geometric_growth(F, span) if initial_growth is None else np.broadcast_to(np.asarray(initial_growth, float), F.shape[:1])
    denom = g + rate
    bad = ~(np.isfinite(denom) & (denom > 0))
    if np.any(bad):
        raise NonPositiveInitialGrowth(f"g + rate must be positive; rows {np.flatnonzero(bad).tolist()} give {denom[bad]}")
    S = np.empty_like(F)
    S[:, 0] = F[:, 0] / denom
    for t in range(1, F.shape[1]):
        S[:, t] = (1 - rate) * S[:, t - 1] + F[:, t]
    return S[0] if one_d else S


def knowledge_stock(patents, tau: float = DEFAULT_TAU, span=None, initial_growth=None) -> np.ndarray:
    return perpetual_inventory(patents, tau, span, initial_growth)


def compute_stocks(
    raw: RawPanel, delta: float = DEFAULT_DELTA, tau: float = DEFAULT_TAU, growth_span: tuple[int, int] | None = None
) -> StockSeries:
    """R&D capital and knowledge stocks; ``growth_span`` is a (first, last) year pair."""
    span = _span_positions(raw.years, growth_span)
    k_r = perpetual_inventory(real_expense(raw), delta, span)
    a = knowledge_stock(raw.patents, tau, span)
    if np.any(k_r <= 0) or np.any(a <= 0):
        raise NonPositive("constructed stocks must be strictly positive; check for zero initial flows")
    return StockSeries(raw.regions, raw.years, _ro(k_r), _ro(a))


def build_regression_panel(
    raw: RawPanel,
    stocks: StockSeries,
    weights: SpatialWeights | Sequence[SpatialWeights] = (),
    zero_patents: str = "error",
) -> PanelMatrix:
    """Response ``ln P(t+1)`` on ``ln K_r, ln L_r, ln A`` and spillover columns.

    Each weight matrix contributes a column ``sum_j w_ij ln A_j(t)``, named
    ``wlnA`` for a single matrix and ``w1lnA``, ``w2lnA``, ... for a list.
    ``zero_patents="log1p"`` substitutes ``ln(P + 1)`` for the response.
    """
    if stocks.regions != raw.regions or not np.array_equal(stocks.years, raw.years):
        raise DimensionMismatch("stocks and raw panel cover different regions or years")
    if raw.years.size < 2:
        raise InputError("a lead response needs at least two years")
    many = not isinstance(weights, SpatialWeights)
    wlist = list(weights) if many else [weights]
    wlist = [w if w.labels == raw.regions else w.reorder(raw.regions) for w in wlist]
    for w in wlist:
        if w.n != len(raw.regions):
            raise DimensionMismatch(f"weights are {w.n}x{w.n} for {len(raw.regions)} regions")

    lead = raw.patents[:, 1:]
    if zero_patents == "log1p":
        y = np.log1p(lead)
    elif zero_patents == "error":
        zeros = np.argwhere(lead <= 0)
        if zeros.size:
            i, t = zeros[0]
            raise ZeroResponse(
                f"zero patents for {raw.regions[i]} in {raw.years[t + 1]}; ln(0) is undefined (use zero_patents='log1p')"
            )
        y = np.log(lead)
    else:
        raise InputError(f"zero_patents must be 'error' or 'log1p', got {zero_patents!r}")

    lnA = np.log(stocks.a)[:, :-1]
    cols = [np.log(stocks.k_r)[:, :-1], np.log(raw.personnel)[:, :-1], lnA]
    names = ["lnKr", "lnLr", "lnA"]
    for b, w in enumerate(wlist, start=1):
        cols.append(w.w @ lnA)
        names.append(f"w{b}lnA" if many else "wlnA")
    return PanelMatrix(raw.regions, raw.years[:-1], y, np.stack(cols, axis=2), tuple(names))


def growth_rates_empirical(patents, stocks_a, regions=None, years=None) -> GrowthPanel:
    """``g_it = P_i(t) / A_i(t-1)`` from the second year on."""
    P = np.atleast_2d(np.asarray(patents, dtype=float))
    A = np.atleast_2d(np.asarray(stocks_a, dtype=float))
    if P.shape != A.shape:
        raise DimensionMismatch(f"patents {P.shape} and stocks {A.shape} differ in shape")
    if np.any(A <= 0):
        raise NonPositive("knowledge stocks must be positive")
    N, T = P.shape
    regions = tuple(regions) if regions is not None else tuple(f"R{i + 1}" for i in range(N))
    years = np.asarray(years if years is not None else np.arange(T), dtype=int)
    return GrowthPanel(regions, years[1:], P[:, 1:] / A[:, :-1])


def sigma_series(g: GrowthPanel) -> SigmaSeries:
    """Cross-sectional mean and population standard deviation per year."""
    G = np.asarray(g.g, dtype=float)
    if G.shape[0] < 2:
        raise TooFewRegions("sigma convergence needs at least two regions")
    mean = G.mean(axis=0)
    sigma = np.sqrt(((G - mean) ** 2).mean(axis=0))
    # identical values can leave a rounding residue in the mean
    sigma[np.ptp(G, axis=0) == 0] = 0.0
    return SigmaSeries(np.asarray(g.years), mean, sigma)


def synth_dynamics(
    config: EconomyConfig,
    initial: EconomyState,
    dt: float,
    horizon: float,
    obs_noise_sd: float = 0.0,
    seed: int = 0,
    base_year: int = 2000,
    region_ids: Sequence[str] | None = None,
) -> RawPanel:
    """Annual panel sampled from a simulated path.

    Year ``base_year + y`` reports patents ``P = dA/dt`` at model time
    ``y - 1``, R&D expense ``a_K K`` and personnel ``a_L L`` at time ``y``.
    Deflators are 1. Noise is multiplicative lognormal.
    """
    if obs_noise_sd < 0:
        raise ParameterOutOfRange("obs_noise_sd must be nonnegative")
    n_years = int(math.floor(horizon + 1e-9))
    if n_years < 1:
        raise InputError("horizon must cover at least one year")
    per_year = round(1.0 / dt)
    if per_year < 1 or abs(per_year * dt - 1.0) > 1e-9:
        raise InputError("dt must divide one year evenly")
    traj = simulate(config, initial, dt, float(n_years), tol=0.0, record_every=per_year)
    steps = np.rint((traj.times - initial.t) / dt).astype(int)
    rows = {s: i for i, s in enumerate(steps)}
    idx = [rows[y * per_year] for y in range(n_years + 1)]
    A = np.exp(traj.ln_A[idx])
    K = np.exp(traj.ln_K[idx])
    L = np.exp(traj.ln_L[idx])
    Adot = traj.g_A[idx] * A
    p = config.params
    P = Adot[:-1].T
    R = (p.a_K * K[1:]).T
    Lr = (p.a_L * L[1:]).T
    if obs_noise_sd > 0:
        rng = np.random.default_rng(seed)
        P, R, Lr = (x * np.exp(rng.normal(0.0, obs_noise_sd, x.shape)) for x in (P, R, Lr))
    N = config.n_regions
    regions = tuple(region_ids) if region_ids is not None else tuple(config.weights.labels)
    years = base_year + np.arange(1, n_years + 1)
    return RawPanel(regions, years, P, R, Lr, np.ones((N, n_years)))


def truncnorm_mean(mu: float, sd: float) -> float:
    """Mean of ``N(mu, sd^2)`` truncated below at zero."""
    a = -mu / sd
    return mu + sd * math.exp(stats.norm.logpdf(a) - stats.norm.logsf(a))


def synth_sfa(
    true_params: SfaParams,
    N: int,
    T: int,
    x_design: dict | None = None,
    seed: int = 0,
    base_year: int = 2000,
    return_inefficiency: bool = False,
):
    """Panel drawn from the decay frontier model.

    ``x_design`` keys: ``mean`` and ``sd`` (scalars or per-regressor lists)
    and ``region_sd`` for a persistent region component in each regressor.
    The number of regressors is ``len(true_params.beta) - 1``.
    """
    p = true_params.validate()
    k = p.beta.size - 1
    if k < 1 or N < 1 or T < 2:
        raise ParameterOutOfRange("need at least one regressor, one region and two periods")
    design = {"mean": 0.0, "sd": 1.0, "region_sd": 0.0, **(x_design or {})}
    rng = np.random.default_rng(seed)
    mean = np.broadcast_to(np.asarray(design["mean"], float), (k,))
    sd = np.broadcast_to(np.asarray(design["sd"], float), (k,))
    X = mean + sd * rng.normal(size=(N, T, k)) + design["region_sd"] * rng.normal(size=(N, 1, k))
    years = base_year + np.arange(T)
    v = rng.normal(0.0, math.sqrt(p.sigma_v_sq), (N, T))
    if p.gamma_var > 0:
        su = math.sqrt(p.sigma_u_sq)
        u = stats.truncnorm.rvs(-p.mu_trunc / su, np.inf, loc=p.mu_trunc, scale=su, size=N, random_state=rng)
    else:
        u = np.zeros(N)
    names = tuple(f"x{j + 1}" for j in range(k))
    ids = tuple(f"R{i + 1:03d}" for i in range(N))
    panel = PanelMatrix(ids, years, np.zeros((N, T)), X, names)
    w = decay_weights(panel, p.eta)
    ineff = u[:, None] * w[None, :]
    y = p.beta[0] + X @ p.beta[1:] + v - ineff
    panel = PanelMatrix(ids, years, y, X, names)
    return (panel, ineff) if return_inefficiency else panel


def panel_to_frame(panel: PanelMatrix) -> pd.DataFrame:
    N, T = panel.n_regions, panel.n_periods
    data = {"region": np.repeat(panel.region_ids, T), "year": np.tile(panel.years, N), "y": panel.y.reshape(-1)}
    for j, name in enumerate(panel.regressor_names):
        data[name] = panel.X[:, :, j].reshape(-1)
    return pd.DataFrame(data)


def panel_from_frame(df: pd.DataFrame, source: str = "<frame>") -> PanelMatrix:
    """Inverse of :func:`panel_to_frame`: columns region, year, y, then regressors."""
    for c in ("region", "year", "y"):
        if c not in df.columns:
            raise SchemaError(f"{source}: regression panel needs column {c!r}")
    names = [c for c in df.columns if c not in ("region", "year", "y")]
    if not names:
        raise SchemaError(f"{source}: regression panel has no regressor columns")
    df = df.copy()
    df["region"] = df["region"].astype(str)
    for c in ["year", "y", *names]:
        df[c] = pd.to_numeric(df[c], errors="coerce")
        if df[c].isna().any():
            i = int(np.flatnonzero(df[c].isna().to_numpy())[0])
            raise SchemaError(f"{source}: row {i + 2}: column {c!r} is not numeric")
    regions = list(dict.fromkeys(df["region"]))
    years = np.arange(int(df["year"].min()), int(df["year"].max()) + 1)
    have = set(zip(df["region"], df["year"].astype(int)))
    for r in regions:
        for yv in years:
            if (r, int(yv)) not in have:
                raise UnbalancedPanel(f"{source}: region {r!r} has no row for year {int(yv)}")
    df["year"] = df["year"].astype(int)
    df = df.set_index(["region", "year"]).loc[pd.MultiIndex.from_product([regions, years])]
    N, T = len(regions), years.size
    y = df["y"].to_numpy(float).reshape(N, T)
    X = np.stack([df[c].to_numpy(float).reshape(N, T) for c in names], axis=2)
    return PanelMatrix(regions, years, y, X, tuple(names))


def synth_linear_panel(
    N: int,
    T: int,
    beta: Sequence[float] = (0.5, -0.3),
    effect_corr: float = 0.0,
    effect_sd: float = 1.0,
    noise_sd: float = 1.0,
    seed: int = 0,
    base_year: int = 2000,
) -> PanelMatrix:
    """Linear panel with region effects; ``effect_corr`` loads the effect into every regressor.

    ``effect_corr = 0`` gives effects independent of the regressors (random
    effects consistent); a large value makes only fixed effects consistent.
    """
    beta = np.asarray(beta, dtype=float)
    if N < 2 or T < 2 or beta.size < 1 or effect_sd < 0 or noise_sd < 0:
        raise ParameterOutOfRange("need N >= 2, T >= 2, at least one slope and nonnegative scales")
    rng = np.random.default_rng(seed)
    alpha = rng.normal(0.0, effect_sd, N)
    X = rng.normal(size=(N, T, beta.size)) + effect_corr * alpha[:, None, None]
    y = alpha[:, None] + X @ beta + rng.normal(0.0, noise_sd, (N, T))
    names = tuple(f"x{j + 1}" for j in range(beta.size))
    return PanelMatrix([f"R{i + 1:03d}" for i in range(N)], base_year + np.arange(T), y, X, names)


def random_coordinates(N: int, seed: int = 0, lat=(20.0, 48.0), lon=(75.0, 130.0)) -> list[Coordinates]:
    rng = np.random.default_rng(seed)
    return [
        Coordinates(f"R{i + 1:03d}", float(a), float(b))
        for i, (a, b) in enumerate(zip(rng.uniform(*lat, N), rng.uniform(*lon, N)))
    ]


def synth_band_panel(
    N: int = 30,
    T: int = 15,
    boundaries: Sequence[float] = (1000.0, 2000.0, 3000.0, 4000.0),
    band_effects: Sequence[float] = (0.4, 0.0, 0.0, 0.0, 0.0),
    slopes: Sequence[float] = (0.3, 0.2, 0.5),
    noise_sd: float = 0.05,
    seed: int = 0,
    coords: Sequence[Coordinates] | None = None,
    base_year: int = 2000,
) -> PanelMatrix:
    """Regression panel whose response loads on chosen distance-band spillover columns.

    Regressors are ``lnKr, lnLr, lnA, w1lnA..`` in the layout of
    :func:`build_regression_panel`; the own-region controls and ``ln A`` follow
    region-specific random walks with drift.
    """
    rng = np.random.default_rng(seed)
    fixed = coords is not None
    for _ in range(100):
        cand = list(coords) if fixed else random_coordinates(N, seed=int(rng.integers(2**32)))
        dist = haversine_distances(cand)
        bands = band_partition(row_standardize(inverse_square_weights(dist)), dist, list(boundaries))
        if all(np.any(b.w > 0) for b in bands) or fixed:
            break
    if not all(np.any(b.w > 0) for b in bands):
        raise InputError("some distance band has no region pairs; widen the map or move the boundaries")
    coords = cand
    N = len(coords)
    effects = np.asarray(band_effects, dtype=float)
    if effects.size != len(bands):
        raise DimensionMismatch(f"{len(bands)} bands but {effects.size} band effects")

    def walk(level_sd, drift_sd, step_sd):
        start = rng.normal(0.0, level_sd, (N, 1))
        drift = rng.normal(0.05, drift_sd, (N, 1))
        return start + drift * np.arange(T) + np.cumsum(rng.normal(0.0, step_sd, (N, T)), axis=1)

    lnKr, lnLr, lnA = walk(1.0, 0.02, 0.1), walk(1.0, 0.02, 0.1), walk(1.0, 0.02, 0.1)
    spill = [b.w @ lnA for b in bands]
    own = np.stack([lnKr, lnLr, lnA], axis=2)
    X = np.concatenate([own, np.stack(spill, axis=2)], axis=2)
    effect = rng.normal(0.0, 1.0, (N, 1))
    y = effect + own @ np.asarray(slopes, float) + np.stack(spill, axis=2) @ effects + rng.normal(0.0, noise_sd, (N, T))
    names = ("lnKr", "lnLr", "lnA", *(f"w{b + 1}lnA" for b in range(len(bands))))
    return PanelMatrix([c.region_id for c in coords], base_year + np.arange(T), y, X, names)


def nested_band_models(n_bands: int = 5) -> list[tuple[str, ...]]:
    """Regressor lists for the nested fits: model j drops the ``j - 1`` farthest bands."""
    own = ("lnKr", "lnLr", "lnA")
    return [own + tuple(f"w{b}lnA" for b in range(1, n_bands - j + 1)) for j in range(n_bands)]
