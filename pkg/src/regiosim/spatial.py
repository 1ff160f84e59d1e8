"""Distance matrices, inverse-squared-distance weights, distance bands and Moran's I."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .errors import (
    BoundaryNotIncreasing,
    CoordinateOutOfRange,
    DegenerateField,
    DimensionMismatch,
    DuplicateRegion,
    InputError,
    InsufficientPermutations,
    SchemaError,
    ZeroDistance,
)

EARTH_RADIUS_KM = 6371.0
ROW_SUM_TOL = 1e-12


class IsolatedRegionWarning(UserWarning):
    """A region has no positive weight toward any other region."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Coordinates:
    region_id: str
    lat: float
    lon: float


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric, zero-diagonal matrix of distances in kilometres."""

    labels: tuple
    d: np.ndarray

    def __post_init__(self):
        d = _frozen(self.d)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "d", d)
        n = len(self.labels)
        if d.shape != (n, n):
            raise DimensionMismatch(f"distance matrix shape {d.shape} does not match {n} labels")
        if len(set(self.labels)) != n:
            raise DuplicateRegion("distance matrix labels are not unique")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise InputError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise InputError("distance matrix diagonal must be zero")
        if not np.allclose(d, d.T, rtol=1e-12, atol=0.0):
            raise InputError("distance matrix is not symmetric")


@dataclass(frozen=True)
class SpatialWeights:
    """Nonnegative zero-diagonal interaction matrix.

    When ``standardized`` is set, each row sums to one unless the region is
    isolated (all-zero row); isolated row indices are listed in ``isolated``.
    """

    labels: tuple
    w: np.ndarray
    standardized: bool = False
    isolated: tuple = field(default=())

    def __post_init__(self):
        w = _frozen(self.w)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "w", w)
        n = len(self.labels)
        if w.ndim != 2 or w.shape != (n, n):
            raise DimensionMismatch(f"weight matrix shape {w.shape} does not match {n} labels")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InputError("weights must be finite and nonnegative")
        if np.any(np.diag(w) != 0):
            raise InputError("weight matrix diagonal must be zero")
        rows = w.sum(axis=1)
        isolated = tuple(int(i) for i in np.flatnonzero(rows == 0))
        object.__setattr__(self, "isolated", isolated)
        if self.standardized:
            live = rows != 0
            if np.any(np.abs(rows[live] - 1.0) > 1e-9):
                raise InputError("standardized weights must have unit row sums")

    @property
    def n(self) -> int:
        return len(self.labels)

    @classmethod
    def uniform(cls, labels: Sequence[str]) -> "SpatialWeights":
        """Equal weight toward every other region (row-stochastic)."""
        n = len(labels)
        if n == 1:
            return cls(labels, np.zeros((1, 1)), standardized=True)
        w = np.full((n, n), 1.0 / (n - 1))
        np.fill_diagonal(w, 0.0)
        return cls(labels, w, standardized=True)

    def reorder(self, labels: Sequence[str]) -> "SpatialWeights":
        labels = [str(x) for x in labels]
        if sorted(labels) != sorted(self.labels):
            raise DimensionMismatch("weight labels do not match the requested regions")
        idx = [self.labels.index(x) for x in labels]
        return SpatialWeights(labels, self.w[np.ix_(idx, idx)], self.standardized)


def haversine_distances(coords: Sequence[Coordinates]) -> DistanceMatrix:
    """Great-circle distances on a sphere of radius 6371 km."""
    if len(coords) < 2:
        raise InputError("at least two regions are required")
    labels = [str(c.region_id) for c in coords]
    if len(set(labels)) != len(labels):
        dup = sorted({x for x in labels if labels.count(x) > 1})
        raise DuplicateRegion(f"duplicate region ids: {dup}")
    lat = np.array([c.lat for c in coords], dtype=float)
    lon = np.array([c.lon for c in coords], dtype=float)
    bad = np.flatnonzero(~((np.abs(lat) <= 90) & (np.abs(lon) <= 180)))
    if bad.size:
        raise CoordinateOutOfRange(f"coordinates out of range for {[labels[i] for i in bad]}")
    phi = np.radians(lat)
    lam = np.radians(lon)
    dphi = phi[:, None] - phi[None, :]
    dlam = lam[:, None] - lam[None, :]
    h = np.sin(dphi / 2) ** 2 + np.cos(phi)[:, None] * np.cos(phi)[None, :] * np.sin(dlam / 2) ** 2
    d = 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(labels, d)


def inverse_square_weights(dist: DistanceMatrix) -> SpatialWeights:
    """``w_ij = 1 / d_ij**2`` off the diagonal, zero on it (not standardized)."""
    d = dist.d
    off = ~np.eye(len(dist.labels), dtype=bool)
    if np.any(d[off] <= 0):
        i, j = np.argwhere((d <= 0) & off)[0]
        raise ZeroDistance(f"zero distance between {dist.labels[i]} and {dist.labels[j]}")
    w = np.zeros_like(d)
    w[off] = 1.0 / d[off] ** 2
    return SpatialWeights(dist.labels, w, standardized=False)


def row_standardize(raw: SpatialWeights) -> SpatialWeights:
    """Divide each row by its sum; all-zero rows stay zero and trigger a warning."""
    w = np.array(raw.w)
    rows = w.sum(axis=1)
    live = rows > 0
    w[live] = w[live] / rows[live, None]
    out = SpatialWeights(raw.labels, w, standardized=True)
    if out.isolated:
        names = [raw.labels[i] for i in out.isolated]
        warnings.warn(f"isolated regions with no neighbours: {names}", IsolatedRegionWarning, stacklevel=2)
    return out


def band_partition(w_std: SpatialWeights, dist: DistanceMatrix, boundaries: Sequence[float]) -> list[SpatialWeights]:
    """Split ``w_std`` into ``len(boundaries) + 1`` distance bands.

    Band ``b`` keeps the entries whose distance lies in ``(lower_b, upper_b]``;
    the first band includes everything at or below the first boundary and the
    last band is open above. Bands are not re-standardized.
    """
    b = np.asarray(boundaries, dtype=float)
    if b.ndim != 1 or b.size == 0 or np.any(np.diff(b) <= 0) or not np.all(np.isfinite(b)):
        raise BoundaryNotIncreasing(f"band boundaries must be strictly increasing, got {list(boundaries)}")
    if tuple(w_std.labels) != tuple(dist.labels):
        dist = _reorder_distances(dist, w_std.labels)
    # searchsorted(side="left") puts d == boundary into the lower band
    band_of = np.searchsorted(b, dist.d, side="left")
    out = []
    for k in range(b.size + 1):
        wk = np.where(band_of == k, w_std.w, 0.0)
        out.append(SpatialWeights(w_std.labels, wk, standardized=False))
    return out


def _reorder_distances(dist: DistanceMatrix, labels) -> DistanceMatrix:
    if sorted(labels) != sorted(dist.labels):
        raise DimensionMismatch("distance labels do not match weight labels")
    idx = [dist.labels.index(x) for x in labels]
    return DistanceMatrix(labels, dist.d[np.ix_(idx, idx)])


def _weights_array(w) -> np.ndarray:
    return np.asarray(w.w if isinstance(w, SpatialWeights) else w, dtype=float)


def morans_i(values, w) -> float:
    """Global Moran's I of ``values`` under weights ``w``."""
    y = np.asarray(values, dtype=float)
    W = _weights_array(w)
    if y.ndim != 1 or y.size < 2:
        raise InputError("Moran's I needs a vector of at least two values")
    if W.shape != (y.size, y.size):
        raise DimensionMismatch(f"weights {W.shape} do not match {y.size} values")
    if np.all(y == y[0]):
        raise DegenerateField("all values are equal")
    s0 = W.sum()
    if s0 == 0:
        raise DegenerateField("weights sum to zero")
    z = y - y.mean()
    return float(y.size / s0 * (z @ W @ z) / (z @ z))


@dataclass(frozen=True)
class MoranResult:
    I: float
    expected: float
    variance: float
    z: float
    p: float
    method: str
    n_perm: int | None = None
    seed: int | None = None


def _randomization_variance(z: np.ndarray, W: np.ndarray) -> float:
    n = z.size
    if n < 4:
        raise DegenerateField("the randomization variance needs at least four regions")
    s0 = W.sum()
    s1 = 0.5 * ((W + W.T) ** 2).sum()
    s2 = ((W.sum(axis=1) + W.sum(axis=0)) ** 2).sum()
    m2 = (z**2).sum()
    b2 = n * (z**4).sum() / m2**2
    ei = -1.0 / (n - 1)
    num = n * ((n * n - 3 * n + 3) * s1 - n * s2 + 3 * s0**2) - b2 * ((n * n - n) * s1 - 2 * n * s2 + 6 * s0**2)
    v = num / ((n - 1) * (n - 2) * (n - 3) * s0**2) - ei**2
    if not v > 0:
        raise DegenerateField("non-positive randomization variance")
    return float(v)


def _permuted_statistics(z, W, seed, start, stop) -> np.ndarray:
    n = z.size
    perms = np.empty((stop - start, n), dtype=np.intp)
    for row, k in enumerate(range(start, stop)):
        perms[row] = np.random.default_rng([seed, k]).permutation(n)
    Z = z[perms]
    return n / W.sum() * np.einsum("ij,ij->i", Z @ W.T, Z) / (z @ z)


def morans_test(
    values,
    w,
    method: str = "permutation",
    n_perm: int = 999,
    seed: int = 0,
    chunk_size: int = 250,
    workers: int = 1,
) -> MoranResult:
    """Moran's I with an analytic (randomization) or permutation test.

    Each permutation's shuffle is drawn from a generator seeded with
    ``(seed, permutation index)``, so ``chunk_size`` and ``workers`` do not
    change the result.
    """
    I = morans_i(values, w)
    y = np.asarray(values, dtype=float)
    W = _weights_array(w)
    z = y - y.mean()
    n = y.size
    ei = -1.0 / (n - 1)
    if method == "analytic":
        var = _randomization_variance(z, W)
        zs = (I - ei) / np.sqrt(var)
        p = float(min(1.0, 2.0 * stats.norm.sf(abs(zs))))
        return MoranResult(I, ei, var, float(zs), p, "analytic")
    if method != "permutation":
        raise InputError(f"unknown Moran test method {method!r}")
    if n_perm < 99:
        raise InsufficientPermutations(f"n_perm must be at least 99, got {n_perm}")
    bounds = [(a, min(a + chunk_size, n_perm)) for a in range(0, n_perm, max(1, chunk_size))]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda ab: _permuted_statistics(z, W, seed, *ab), bounds))
    else:
        parts = [_permuted_statistics(z, W, seed, a, b) for a, b in bounds]
    sims = np.concatenate(parts)
    extreme = np.count_nonzero(np.abs(sims - ei) >= abs(I - ei))
    p = (1 + extreme) / (n_perm + 1)
    var = float(sims.var(ddof=1))
    zs = (I - ei) / np.sqrt(var) if var > 0 else float("nan")
    return MoranResult(I, ei, var, float(zs), float(p), "permutation", n_perm, seed)


def load_coordinates(path) -> list[Coordinates]:
    """Read a ``region_id,lat,lon`` CSV; ids keep file order."""
    df = pd.read_csv(path, dtype={"region_id": str}, float_precision="round_trip")
    missing = [c for c in ("region_id", "lat", "lon") if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    for c in ("lat", "lon"):
        vals = pd.to_numeric(df[c], errors="coerce")
        if vals.isna().any():
            i = int(np.flatnonzero(vals.isna().to_numpy())[0])
            raise SchemaError(f"{path}: row {i + 2}: column {c!r} is not numeric")
        df[c] = vals
    return [Coordinates(str(r), float(a), float(b)) for r, a, b in zip(df["region_id"], df["lat"], df["lon"])]


def load_distances(path) -> DistanceMatrix:
    """Read a square CSV whose header row and first column hold region ids (km)."""
    df = pd.read_csv(path, index_col=0, dtype=str)
    rows = [str(x) for x in df.index]
    cols = [str(x) for x in df.columns]
    if rows != cols:
        raise SchemaError(f"{path}: row and column region ids differ")
    try:
        d = df.to_numpy(dtype=float)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric distance entry ({exc})") from exc
    return DistanceMatrix(tuple(rows), d)


def write_matrix(path, labels: Sequence[str], m: np.ndarray) -> None:
    """Square matrix CSV with region ids as header row and first column."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(["region_id", *labels]) + "\n")
        for lab, row in zip(labels, np.asarray(m, dtype=float)):
            fh.write(",".join([lab, *(repr(float(v)) for v in row)]) + "\n")
