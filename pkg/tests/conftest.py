"""Shared fixtures: bundled German data, trained model, small synthetic sets."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from cfselect.blackbox import TrainConfig, train
from cfselect.data import (
    CATEGORICAL,
    CONTINUOUS,
    Dataset,
    FeatureSchema,
    FeatureSpec,
    Instance,
    RangeTable,
    load_dataset,
)
from cfselect.explainers import ExplainerConfig
from cfselect.pipeline import PipelineConfig

REPO = Path(__file__).resolve().parent.parent
DATA_DIR = REPO / "data"
TOY_FIXTURE = DATA_DIR / "toy_adult_fixture.jsonl"


def build_dataset(
    kinds: dict[str, str],
    rows: list[tuple],
    labels: list[str],
    test_indices: list[int],
    immutable: set[str] = frozenset(),
) -> Dataset:
    """Construct a fitted Dataset directly from in-memory rows."""
    names = list(kinds)
    train_indices = [i for i in range(len(rows)) if i not in set(test_indices)]
    specs = []
    bounds = {}
    for j, name in enumerate(names):
        col = [rows[i][j] for i in train_indices]
        if kinds[name] == CONTINUOUS:
            lo, hi = float(min(col)), float(max(col))
            bounds[name] = (lo, hi)
            specs.append(FeatureSpec(name, CONTINUOUS, range=(lo, hi),
                                     immutable=name in immutable))
        else:
            specs.append(FeatureSpec(name, CATEGORICAL,
                                     categories=tuple(sorted(set(col))),
                                     immutable=name in immutable))
    return Dataset(
        schema=FeatureSchema(features=tuple(specs)),
        rows=[Instance(values=tuple(r), id=i) for i, r in enumerate(rows)],
        labels=labels,
        train_indices=train_indices,
        test_indices=test_indices,
        ranges=RangeTable(bounds=bounds),
    )


def separable_dataset(n: int = 200, seed: int = 0, test: int = 40) -> Dataset:
    """Two continuous features, linearly separable label x1 + x2 > 1."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1, size=(n, 2))
    keep = np.abs(pts.sum(axis=1) - 1.0) > 0.05  # margin for clean separation
    pts = pts[keep]
    rows = [tuple(map(float, p)) for p in pts]
    labels = ["pos" if a + b > 1 else "neg" for a, b in rows]
    test_indices = list(range(len(rows) - test, len(rows)))
    return build_dataset({"x1": CONTINUOUS, "x2": CONTINUOUS}, rows, labels, test_indices)


class StubModel:
    """Duck-typed classifier for metric unit tests."""

    def __init__(self, fn, classes=("neg", "pos")):
        self.fn = fn
        self.classes = tuple(classes)

    def predict(self, x: Instance) -> str:
        return self.fn(x)

    def predict_batch(self, rows) -> list[str]:
        return [self.fn(r) for r in rows]


@pytest.fixture(scope="session")
def german_data() -> Dataset:
    return load_dataset(DATA_DIR / "german_credit.csv", DATA_DIR / "german_schema.yaml")


@pytest.fixture(scope="session")
def german_model(german_data):
    model, report = train(german_data, TrainConfig(seed=7))
    assert report.val_accuracy > 0.5
    return model


@pytest.fixture(scope="session")
def toy2d() -> Dataset:
    return separable_dataset()


@pytest.fixture(scope="session")
def toy2d_model(toy2d):
    model, _ = train(toy2d, TrainConfig(hidden=(16, 16), epochs=60, seed=3, dropout=0.0))
    return model


@pytest.fixture
def fast_cfg() -> ExplainerConfig:
    return ExplainerConfig(
        seed=11, nun_k=3, gs_restarts=3, gs_samples_per_shell=30, gs_refine_steps=3,
        wachter_k=4, wachter_steps=150, dice_restarts=4, dice_steps=100, cadex_caps=5,
    )


@pytest.fixture(scope="session")
def german_artifacts(german_data, german_model):
    """Full 30-instance evaluation shared by harness and acceptance tests."""
    from cfselect.evaluation import evaluate_dataset

    cfg = PipelineConfig(metric="L2", explainers=ExplainerConfig(seed=7))
    return evaluate_dataset(
        german_data, german_model, cfg, n_instances=30, seed=7, dataset_name="german"
    )
