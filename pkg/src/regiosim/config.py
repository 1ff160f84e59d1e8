"""Run-configuration loading, schema validation and object construction."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError, DimensionMismatch, SchemaError
from .model import EconomyConfig, EconomyState, ModelParams, RegionParams
from .spatial import (
    DistanceMatrix,
    SpatialWeights,
    haversine_distances,
    inverse_square_weights,
    load_coordinates,
    load_distances,
    row_standardize,
)

DEFAULT_BANDS = (1000.0, 2000.0, 3000.0, 4000.0)


def load_schema() -> dict:
    text = resources.files("regiosim").joinpath("schemas/run_config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _json_path(error: jsonschema.ValidationError) -> str:
    parts = ["$"]
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "".join(parts)


def validate_document(doc: dict) -> None:
    """Raise :class:`SchemaError` listing every violation with its JSON path."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        problems = [f"{_json_path(e)}: {e.message}" for e in errors]
        raise SchemaError("config failed validation:\n  " + "\n  ".join(problems), problems)


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


@dataclass
class RunConfig:
    doc: dict
    base_dir: Path
    inputs: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file {path} does not exist") from None
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise SchemaError(f"{path}: top level must be a JSON object")
        validate_document(doc)
        return cls(doc, path.resolve().parent)

    @classmethod
    def empty(cls) -> "RunConfig":
        return cls({}, Path.cwd())

    def section(self, name: str) -> dict:
        return self.doc.get(name, {})

    def require(self, *names: str) -> None:
        missing = [n for n in names if n not in self.doc]
        if missing:
            raise ConfigError(f"this command needs config section(s) {missing}")

    def resolve(self, rel: str) -> Path:
        """Resolve an input path against the config's directory and record its hash."""
        p = Path(rel)
        if not p.is_absolute():
            p = self.base_dir / p
        if not p.is_file():
            raise ConfigError(f"input file {p} does not exist")
        self.inputs[str(rel)] = hashlib.sha256(p.read_bytes()).hexdigest()
        return p

    def hash(self) -> str:
        return hashlib.sha256(canonical_json(self.doc).encode()).hexdigest()

    def with_overrides(self, **sections) -> "RunConfig":
        doc = copy.deepcopy(self.doc)
        for name, values in sections.items():
            if values is None:
                continue
            if isinstance(values, dict):
                doc.setdefault(name, {})
                doc[name].update({k: v for k, v in values.items() if v is not None})
            else:
                doc[name] = values
        validate_document(doc)
        return RunConfig(doc, self.base_dir, dict(self.inputs))


def model_params(cfg: RunConfig) -> ModelParams:
    cfg.require("model")
    return ModelParams(**cfg.section("model"))


def _broadcast(block, key, count, default=None):
    v = block.get(key, default)
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.size == 1:
        return np.full(count, float(arr[0]))
    if arr.size != count:
        raise DimensionMismatch(f"regions.{key} has {arr.size} entries for {count} regions")
    return arr


def region_table(cfg: RunConfig):
    """``(ids, mu, s, n, A0, K0, L0)`` from either region layout."""
    cfg.require("regions")
    regions = cfg.doc["regions"]
    if isinstance(regions, list):
        count = len(regions)
        ids = [r.get("id", f"R{i + 1}") for i, r in enumerate(regions)]
        cols = {k: np.array([float(r.get(k, 1.0)) for r in regions]) for k in ("mu", "s", "n", "A0", "K0", "L0")}
    else:
        count = regions["count"]
        ids = regions.get("ids") or [f"R{i + 1}" for i in range(count)]
        if len(ids) != count:
            raise DimensionMismatch(f"regions.ids has {len(ids)} entries for count={count}")
        cols = {k: _broadcast(regions, k, count, 1.0) for k in ("mu", "s", "n", "A0", "K0", "L0")}
    if len(set(ids)) != len(ids):
        raise ConfigError("region ids must be unique")
    return [str(i) for i in ids], cols


def distance_matrix(cfg: RunConfig) -> DistanceMatrix | None:
    w = cfg.section("weights")
    source = w.get("source", "uniform")
    if source == "uniform":
        return None
    if "path" not in w:
        raise ConfigError(f"weights.source={source!r} needs weights.path")
    path = cfg.resolve(w["path"])
    return haversine_distances(load_coordinates(path)) if source == "coordinates" else load_distances(path)


def weights_for(cfg: RunConfig, labels) -> tuple[SpatialWeights, DistanceMatrix | None]:
    """Row-standardized weights ordered as ``labels``."""
    dist = distance_matrix(cfg)
    if dist is None:
        return SpatialWeights.uniform(labels), None
    w = row_standardize(inverse_square_weights(dist))
    missing = [lab for lab in labels if lab not in w.labels]
    if missing:
        raise DimensionMismatch(f"weights source has no entry for regions {missing}")
    if len(w.labels) != len(labels):
        raise DimensionMismatch(f"weights cover {len(w.labels)} regions, config lists {len(labels)}")
    order = [dist.labels.index(lab) for lab in labels]
    dist = DistanceMatrix(tuple(labels), dist.d[np.ix_(order, order)])
    return w.reorder(labels), dist


def economy(cfg: RunConfig) -> tuple[EconomyConfig, EconomyState]:
    params = model_params(cfg)
    ids, cols = region_table(cfg)
    weights, _ = weights_for(cfg, ids)
    regions = tuple(RegionParams(float(m), float(s), float(n)) for m, s, n in zip(cols["mu"], cols["s"], cols["n"]))
    state = EconomyState.from_levels(0.0, cols["A0"], cols["K0"], cols["L0"])
    return EconomyConfig(params, regions, weights), state


def integration(cfg: RunConfig) -> dict:
    s = cfg.section("integration")
    return {"dt": s.get("dt", 0.05), "horizon": s.get("horizon", 100.0), "tol": s.get("tol", 1e-8), "record_every": s.get("record_every")}


def bands(cfg: RunConfig) -> list[float]:
    return list(cfg.doc.get("bands", DEFAULT_BANDS))
