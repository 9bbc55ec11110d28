"""Tabular data handling: feature schema, CSV loading, HEOM distance, k-NN.

Every downstream quality measure is built on the heterogeneous
Euclidean-overlap metric (HEOM), which mixes range-normalized absolute
differences for continuous features with 0/1 overlap for categorical ones.
Range denominators always come from the training split.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .errors import LoadError, ParameterError

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

# Fallback holdout sizes used when the schema config names a known dataset
# but omits test_size.
DEFAULT_TEST_SIZES = {"adult": 250, "german": 100, "compas": 250, "fico": 250}


@dataclass(frozen=True)
class FeatureSpec:
    """One column of the tabular schema."""

    name: str
    kind: str  # CONTINUOUS or CATEGORICAL
    categories: tuple[str, ...] = ()
    range: tuple[float, float] | None = None
    immutable: bool = False

    def __post_init__(self) -> None:
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise LoadError(f"feature {self.name!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature list shared by every Instance; the actionability contract."""

    features: tuple[FeatureSpec, ...]

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise LoadError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index(self, name: str) -> int:
        return self.names.index(name)

    @property
    def continuous_indices(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.features) if f.kind == CONTINUOUS)

    @property
    def categorical_indices(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.features) if f.kind == CATEGORICAL)

    @property
    def immutable_indices(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.features) if f.immutable)

    def validate_values(self, values: Sequence) -> None:
        """Raise ParameterError unless *values* conforms to the schema."""
        if len(values) != len(self.features):
            raise ParameterError(
                f"expected {len(self.features)} values, got {len(values)}"
            )
        for v, f in zip(values, self.features):
            if f.kind == CONTINUOUS and not isinstance(v, (int, float, np.floating)):
                raise ParameterError(f"feature {f.name!r} expects a number, got {v!r}")
            if f.kind == CATEGORICAL and not isinstance(v, str):
                raise ParameterError(f"feature {f.name!r} expects a category token, got {v!r}")

    def to_json(self) -> dict:
        out = []
        for f in self.features:
            entry: dict = {"name": f.name, "kind": f.kind, "immutable": f.immutable}
            if f.kind == CATEGORICAL:
                entry["categories"] = list(f.categories)
            elif f.range is not None:
                entry["range"] = [f.range[0], f.range[1]]
            out.append(entry)
        return {"features": out}

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureSchema":
        specs = []
        for entry in obj["features"]:
            specs.append(
                FeatureSpec(
                    name=entry["name"],
                    kind=entry["kind"],
                    categories=tuple(entry.get("categories", ())),
                    range=tuple(entry["range"]) if entry.get("range") else None,
                    immutable=bool(entry.get("immutable", False)),
                )
            )
        return cls(features=tuple(specs))

    def hash(self) -> str:
        """Deterministic digest of the fitted schema, embedded in model files."""
        payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class Instance:
    """One tabular example; value order matches the schema."""

    values: tuple
    id: int | None = None


@dataclass(frozen=True)
class RangeTable:
    """Observed (min, max) per continuous feature on the training split.

    Widths are the HEOM denominators. Zero-width features are recorded so the
    metric can fall back to exact-match scoring for them.
    """

    bounds: dict[str, tuple[float, float]]

    def width(self, name: str) -> float:
        lo, hi = self.bounds[name]
        return hi - lo

    @property
    def zero_width(self) -> frozenset[str]:
        return frozenset(n for n, (lo, hi) in self.bounds.items() if hi == lo)


class Dataset:
    """Immutable container of schema, rows, labels and the train/test split."""

    def __init__(
        self,
        schema: FeatureSchema,
        rows: Sequence[Instance],
        labels: Sequence[str],
        train_indices: Sequence[int],
        test_indices: Sequence[int],
        ranges: RangeTable,
    ) -> None:
        if len(rows) != len(labels):
            raise LoadError("rows and labels differ in length")
        overlap = set(train_indices) & set(test_indices)
        if overlap:
            raise LoadError(f"split indices overlap: {sorted(overlap)[:5]}")
        for i in list(train_indices) + list(test_indices):
            if not 0 <= i < len(rows):
                raise LoadError(f"split index {i} out of bounds")
        self.schema = schema
        self.rows = tuple(rows)
        self.labels = tuple(labels)
        self.train_indices = tuple(train_indices)
        self.test_indices = tuple(test_indices)
        self.ranges = ranges
        self._train_cont, self._train_cat = _split_matrix(
            schema, [rows[i] for i in self.train_indices]
        )

    @property
    def train_rows(self) -> tuple[Instance, ...]:
        return tuple(self.rows[i] for i in self.train_indices)

    @property
    def test_rows(self) -> tuple[Instance, ...]:
        return tuple(self.rows[i] for i in self.test_indices)

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def train_labels(self) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in self.train_indices)

    def test_labels(self) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in self.test_indices)


def _split_matrix(schema: FeatureSchema, rows: Sequence[Instance]):
    """Column-split instances into a float matrix and a category token matrix."""
    cont_idx = schema.continuous_indices
    cat_idx = schema.categorical_indices
    cont = np.array(
        [[float(r.values[i]) for i in cont_idx] for r in rows], dtype=np.float64
    ).reshape(len(rows), len(cont_idx))
    cat = np.array(
        [[r.values[i] for i in cat_idx] for r in rows], dtype=object
    ).reshape(len(rows), len(cat_idx))
    return cont, cat


def _heom_widths(schema: FeatureSchema, ranges: RangeTable) -> np.ndarray:
    names = [schema.features[i].name for i in schema.continuous_indices]
    return np.array([ranges.width(n) for n in names], dtype=np.float64)


def heom_distance(
    a: Instance, b: Instance, schema: FeatureSchema, ranges: RangeTable
) -> float:
    """HEOM distance between two instances.

    Per-feature terms: 0/1 overlap for categoricals; |a-b|/width for
    continuous features, clipped to [0, 1] so out-of-range candidate values
    cannot dominate the metric. A zero-width feature scores 0 when the values
    match and 1 otherwise. Aggregate is the Euclidean norm of the terms.
    """
    total = 0.0
    for i, f in enumerate(schema.features):
        av, bv = a.values[i], b.values[i]
        if f.kind == CONTINUOUS:
            width = ranges.width(f.name)
            if width == 0.0:
                d = 0.0 if float(av) == float(bv) else 1.0
            else:
                d = min(abs(float(av) - float(bv)) / width, 1.0)
        else:
            d = 0.0 if av == bv else 1.0
        total += d * d
    return math.sqrt(total)


def heom_to_train(query: Instance, data: Dataset) -> np.ndarray:
    """Vector of HEOM distances from *query* to every training row."""
    schema = data.schema
    cont_idx = schema.continuous_indices
    cat_idx = schema.categorical_indices
    widths = _heom_widths(schema, data.ranges)

    out = np.zeros(len(data.train_indices), dtype=np.float64)
    if cont_idx:
        q = np.array([float(query.values[i]) for i in cont_idx], dtype=np.float64)
        diffs = np.abs(data._train_cont - q)
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = np.where(widths > 0, diffs / widths, np.where(diffs == 0, 0.0, 1.0))
        np.minimum(scaled, 1.0, out=scaled)
        out += np.sum(scaled * scaled, axis=1)
    if cat_idx:
        qc = np.array([query.values[i] for i in cat_idx], dtype=object)
        out += np.sum(data._train_cat != qc, axis=1).astype(np.float64)
    return np.sqrt(out)


def knn(
    query: Instance, data: Dataset, k: int, exclude_self: bool = False
) -> list[tuple[Instance, float]]:
    """The k nearest training rows to *query* under HEOM, ascending.

    Ties are broken by ascending row id for determinism. With
    ``exclude_self`` the training row sharing the query's id is skipped.
    """
    train = data.train_rows
    dists = heom_to_train(query, data)
    ids = np.array([r.id if r.id is not None else -1 for r in train])
    pos = np.arange(len(train))
    if exclude_self and query.id is not None:
        keep = ids != query.id
        dists, ids, pos = dists[keep], ids[keep], pos[keep]
    if not 1 <= k <= len(dists):
        raise ParameterError(f"k={k} outside [1, {len(dists)}]")
    order = np.lexsort((ids, dists))[:k]
    return [(train[int(pos[j])], float(dists[j])) for j in order]


def _parse_schema_config(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise LoadError(f"cannot read schema config {path}: {exc}") from exc
    if not isinstance(cfg, dict) or "features" not in cfg or "label" not in cfg:
        raise LoadError(f"schema config {path} must define 'features' and 'label'")
    return cfg


def load_dataset(csv_path: str | Path, schema_config: str | Path) -> Dataset:
    """Load a CSV against a declarative schema config.

    The config lists feature kinds, immutable names, the label column, the
    holdout size and the split seed. Category sets and continuous ranges are
    fitted on the training split; a category appearing only in the test split
    is a hard error, as are empty or unparseable cells.
    """
    csv_path, cfg_path = Path(csv_path), Path(schema_config)
    cfg = _parse_schema_config(cfg_path)

    feature_cfg: dict[str, dict] = cfg["features"]
    label_col: str = cfg["label"]
    immutable = set(cfg.get("immutable", []))
    unknown_immutable = immutable - set(feature_cfg)
    if unknown_immutable:
        raise LoadError(f"immutable names not in features: {sorted(unknown_immutable)}")

    test_size = cfg.get("test_size")
    if test_size is None:
        name = str(cfg.get("name", "")).lower()
        test_size = DEFAULT_TEST_SIZES.get(name)
        if test_size is None:
            raise LoadError("schema config needs test_size (or a known dataset name)")
    seed = int(cfg.get("seed", 0))

    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise LoadError(f"{csv_path}: empty file")
            raw_rows = [row for row in reader]
    except OSError as exc:
        raise LoadError(f"cannot read {csv_path}: {exc}") from exc

    col_of = {name: i for i, name in enumerate(header)}
    missing = [c for c in list(feature_cfg) + [label_col] if c not in col_of]
    if missing:
        raise LoadError(f"{csv_path}: missing columns {missing}")

    feature_names = list(feature_cfg)
    kinds = {n: feature_cfg[n].get("kind", CONTINUOUS) for n in feature_names}

    rows: list[Instance] = []
    labels: list[str] = []
    for rownum, raw in enumerate(raw_rows):
        values: list = []
        for n in feature_names:
            cell = raw[col_of[n]].strip()
            if cell == "":
                raise LoadError(f"{csv_path}: empty cell at row {rownum + 2}, column {n!r}")
            if kinds[n] == CONTINUOUS:
                try:
                    values.append(float(cell))
                except ValueError as exc:
                    raise LoadError(
                        f"{csv_path}: unparseable number {cell!r} at row {rownum + 2}, "
                        f"column {n!r}"
                    ) from exc
            else:
                values.append(cell)
        label = raw[col_of[label_col]].strip()
        if label == "":
            raise LoadError(f"{csv_path}: empty label at row {rownum + 2}")
        rows.append(Instance(values=tuple(values), id=rownum))
        labels.append(label)

    n = len(rows)
    if test_size >= n:
        raise LoadError(f"test_size {test_size} must be below row count {n}")
    rng = np.random.default_rng(seed)
    test_idx = np.sort(rng.choice(n, size=test_size, replace=False))
    test_set = set(int(i) for i in test_idx)
    train_idx = [i for i in range(n) if i not in test_set]

    # Fit category sets and ranges on the training split only.
    specs: list[FeatureSpec] = []
    bounds: dict[str, tuple[float, float]] = {}
    for j, name in enumerate(feature_names):
        col = [rows[i].values[j] for i in train_idx]
        if kinds[name] == CONTINUOUS:
            lo, hi = float(min(col)), float(max(col))
            bounds[name] = (lo, hi)
            specs.append(
                FeatureSpec(name=name, kind=CONTINUOUS, range=(lo, hi),
                            immutable=name in immutable)
            )
        else:
            cats = tuple(sorted(set(col)))
            if not cats:
                raise LoadError(f"categorical feature {name!r} has no categories")
            specs.append(
                FeatureSpec(name=name, kind=CATEGORICAL, categories=cats,
                            immutable=name in immutable)
            )
    schema = FeatureSchema(features=tuple(specs))

    # Unknown category in the holdout is a policy violation at load time.
    for i in test_set:
        for j, name in enumerate(feature_names):
            if kinds[name] == CATEGORICAL:
                v = rows[i].values[j]
                if v not in schema.features[j].categories:
                    raise LoadError(
                        f"{csv_path}: category {v!r} in column {name!r} (row {i + 2}) "
                        "appears only outside the training split"
                    )

    return Dataset(
        schema=schema,
        rows=rows,
        labels=labels,
        train_indices=train_idx,
        test_indices=[int(i) for i in test_idx],
        ranges=RangeTable(bounds=bounds),
    )
