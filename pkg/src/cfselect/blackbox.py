"""The classifier under explanation: a small two-hidden-layer MLP.

Implemented directly on numpy so that training, prediction and the on-disk
model format are bit-reproducible given a seed. Categorical features are
one-hot encoded, continuous features min-max scaled; both encoders are
fitted on the training split. Explainers treat the model as a black box
through predict / predict_proba, except the gradient-based ones which use
input_gradient.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Dataset, FeatureSchema, Instance, RangeTable
from .errors import ModelFormatError, ParameterError, TrainingError

_MAGIC = b"CFSELML1"


@dataclass(frozen=True)
class TrainConfig:
    hidden: tuple[int, int] = (32, 16)
    learning_rate: float = 0.1
    epochs: int = 40
    batch_size: int = 32
    dropout: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        for w in self.hidden:
            if not 16 <= w <= 128:
                raise ParameterError(f"hidden width {w} outside [16, 128]")
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ParameterError("dropout must be in [0, 1)")


class Encoder:
    """Maps instances to the model's input vector.

    Layout: continuous features first (schema order, min-max scaled), then
    one-hot blocks per categorical feature (categories in fitted order). A
    category token outside the fitted set encodes as an all-zero block.
    """

    def __init__(self, schema: FeatureSchema, ranges: RangeTable) -> None:
        self.schema = schema
        self.cont_indices = schema.continuous_indices
        self.cat_indices = schema.categorical_indices
        self.lo = np.array(
            [ranges.bounds[schema.features[i].name][0] for i in self.cont_indices]
        )
        self.width = np.array(
            [max(ranges.width(schema.features[i].name), 0.0) for i in self.cont_indices]
        )
        self.categories = [schema.features[i].categories for i in self.cat_indices]

        self.n_cont = len(self.cont_indices)
        self.cat_offsets: list[int] = []
        off = self.n_cont
        for cats in self.categories:
            self.cat_offsets.append(off)
            off += len(cats)
        self.dim = off

    def encode(self, values: Sequence) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for j, i in enumerate(self.cont_indices):
            w = self.width[j]
            vec[j] = (float(values[i]) - self.lo[j]) / w if w > 0 else 0.0
        for j, i in enumerate(self.cat_indices):
            try:
                pos = self.categories[j].index(values[i])
            except ValueError:
                continue  # unseen category -> zero block
            vec[self.cat_offsets[j] + pos] = 1.0
        return vec

    def encode_batch(self, rows: Sequence[Instance]) -> np.ndarray:
        return np.stack([self.encode(r.values) for r in rows]) if rows else np.zeros((0, self.dim))

def _stable_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


class Model:
    """Two-hidden-layer ReLU network with a softmax head."""

    def __init__(
        self,
        encoder: Encoder,
        classes: tuple[str, ...],
        weights: dict[str, np.ndarray],
        schema_hash: str,
    ) -> None:
        self.encoder = encoder
        self.classes = classes
        self.weights = weights
        self.schema_hash = schema_hash

    # -- inference -------------------------------------------------------

    def _forward(self, x: np.ndarray) -> tuple[np.ndarray, ...]:
        w = self.weights
        z1 = x @ w["W1"] + w["b1"]
        a1 = np.maximum(z1, 0.0)
        z2 = a1 @ w["W2"] + w["b2"]
        a2 = np.maximum(z2, 0.0)
        z3 = a2 @ w["W3"] + w["b3"]
        return z1, a1, z2, a2, z3

    def proba_batch(self, encoded: np.ndarray) -> np.ndarray:
        """Class probabilities for a batch of already-encoded inputs."""
        if encoded.ndim == 1:
            encoded = encoded[None, :]
        return _stable_softmax(self._forward(encoded)[-1])

    def predict_proba(self, x: Instance) -> np.ndarray:
        return self.proba_batch(self.encoder.encode(x.values))[0]

    def predict_batch(self, rows: Sequence[Instance]) -> list[str]:
        if not rows:
            return []
        probs = self.proba_batch(self.encoder.encode_batch(rows))
        return [self.classes[int(i)] for i in np.argmax(probs, axis=1)]

    def predict(self, x: Instance) -> str:
        return self.classes[int(np.argmax(self.predict_proba(x)))]

    def class_index(self, label: str) -> int:
        return self.classes.index(label)

    def input_gradient(self, encoded: np.ndarray, class_index: int) -> np.ndarray:
        """d p_class / d input for a single encoded vector (no dropout)."""
        x = encoded[None, :]
        z1, a1, z2, a2, z3 = self._forward(x)
        p = _stable_softmax(z3)[0]
        # softmax jacobian row for the requested class
        dz3 = p[class_index] * (np.eye(len(p))[class_index] - p)
        w = self.weights
        da2 = dz3 @ w["W3"].T
        dz2 = da2 * (z2[0] > 0)
        da1 = dz2 @ w["W2"].T
        dz1 = da1 * (z1[0] > 0)
        return dz1 @ w["W1"].T


@dataclass(frozen=True)
class TrainReport:
    train_accuracy: float
    val_accuracy: float
    final_loss: float


def _init_weights(rng: np.random.Generator, dims: Sequence[int]) -> dict[str, np.ndarray]:
    weights: dict[str, np.ndarray] = {}
    for layer, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:]), start=1):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights[f"W{layer}"] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        weights[f"b{layer}"] = np.zeros(fan_out)
    return weights


def train(data: Dataset, cfg: TrainConfig) -> tuple[Model, TrainReport]:
    """Fit the network with plain mini-batch gradient descent.

    Deterministic given cfg.seed. Dropout is active on the two hidden
    activations during training only. Binary targets only; a non-finite
    loss aborts with a diagnostic.
    """
    if not data.train_indices:
        raise ParameterError("training split is empty")
    classes = data.classes
    if len(classes) != 2:
        raise TrainingError(f"binary targets required, got classes {classes}")

    encoder = Encoder(data.schema, data.ranges)
    x_train = encoder.encode_batch(data.train_rows)
    y_train = np.array([classes.index(l) for l in data.train_labels()])
    n = len(y_train)

    rng = np.random.default_rng(cfg.seed)
    weights = _init_weights(rng, [encoder.dim, cfg.hidden[0], cfg.hidden[1], 2])
    model = Model(encoder, classes, weights, data.schema.hash())

    keep = 1.0 - cfg.dropout
    final_loss = float("nan")
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, yb = x_train[idx], y_train[idx]
            m = len(idx)

            z1 = xb @ weights["W1"] + weights["b1"]
            a1 = np.maximum(z1, 0.0)
            mask1 = (rng.random(a1.shape) < keep) / keep if cfg.dropout > 0 else 1.0
            a1d = a1 * mask1
            z2 = a1d @ weights["W2"] + weights["b2"]
            a2 = np.maximum(z2, 0.0)
            mask2 = (rng.random(a2.shape) < keep) / keep if cfg.dropout > 0 else 1.0
            a2d = a2 * mask2
            z3 = a2d @ weights["W3"] + weights["b3"]
            probs = _stable_softmax(z3)

            eps = 1e-12
            loss = -np.mean(np.log(probs[np.arange(m), yb] + eps))
            epoch_loss += loss * m
            if not np.isfinite(loss) or not np.isfinite(weights["W1"]).all():
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}: {loss!r}; "
                    "lower the learning rate"
                )

            dz3 = probs.copy()
            dz3[np.arange(m), yb] -= 1.0
            dz3 /= m
            gW3 = a2d.T @ dz3
            gb3 = dz3.sum(axis=0)
            da2 = (dz3 @ weights["W3"].T) * mask2
            dz2 = da2 * (z2 > 0)
            gW2 = a1d.T @ dz2
            gb2 = dz2.sum(axis=0)
            da1 = (dz2 @ weights["W2"].T) * mask1
            dz1 = da1 * (z1 > 0)
            gW1 = xb.T @ dz1
            gb1 = dz1.sum(axis=0)

            lr = cfg.learning_rate
            weights["W1"] -= lr * gW1
            weights["b1"] -= lr * gb1
            weights["W2"] -= lr * gW2
            weights["b2"] -= lr * gb2
            weights["W3"] -= lr * gW3
            weights["b3"] -= lr * gb3
        final_loss = epoch_loss / n

    train_acc = _accuracy(model, data.train_rows, data.train_labels())
    val_acc = (
        _accuracy(model, data.test_rows, data.test_labels())
        if data.test_indices
        else float("nan")
    )
    return model, TrainReport(train_acc, val_acc, float(final_loss))


def _accuracy(model: Model, rows: Sequence[Instance], labels: Sequence[str]) -> float:
    if not rows:
        return float("nan")
    preds = model.predict_batch(list(rows))
    return float(np.mean([p == l for p, l in zip(preds, labels)]))


# -- persistence ---------------------------------------------------------
#
# File layout: 8-byte magic (includes version), 4-byte big-endian header
# length, JSON header with sorted keys, then the raw little-endian float64
# array payload in header order. Deliberately timestamp-free so identical
# models produce identical bytes.

_ARRAY_ORDER = ("W1", "b1", "W2", "b2", "W3", "b3")


def save_model(model: Model, path: str | Path) -> None:
    header = {
        "classes": list(model.classes),
        "schema": model.encoder.schema.to_json(),
        "schema_hash": model.schema_hash,
        "ranges": {
            model.encoder.schema.features[i].name: [
                float(model.encoder.lo[j]),
                float(model.encoder.lo[j] + model.encoder.width[j]),
            ]
            for j, i in enumerate(model.encoder.cont_indices)
        },
        "arrays": [
            {"name": name, "shape": list(model.weights[name].shape)}
            for name in _ARRAY_ORDER
        ],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack(">I", len(blob)))
        fh.write(blob)
        for name in _ARRAY_ORDER:
            fh.write(np.ascontiguousarray(model.weights[name], dtype="<f8").tobytes())


def load_model(path: str | Path) -> Model:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc

    if len(raw) < len(_MAGIC) + 4 or raw[: len(_MAGIC) - 1] != _MAGIC[:-1]:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    if raw[: len(_MAGIC)] != _MAGIC:
        raise ModelFormatError(
            f"{path}: unsupported model format version {raw[len(_MAGIC)-1:len(_MAGIC)]!r}"
        )
    (hlen,) = struct.unpack(">I", raw[len(_MAGIC) : len(_MAGIC) + 4])
    start = len(_MAGIC) + 4
    if len(raw) < start + hlen:
        raise ModelFormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[start : start + hlen])
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: corrupt header: {exc}") from exc

    schema = FeatureSchema.from_json(header["schema"])
    ranges = RangeTable(bounds={k: (v[0], v[1]) for k, v in header["ranges"].items()})
    encoder = Encoder(schema, ranges)

    offset = start + hlen
    weights: dict[str, np.ndarray] = {}
    for spec in header["arrays"]:
        shape = tuple(spec["shape"])
        nbytes = int(np.prod(shape)) * 8
        chunk = raw[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise ModelFormatError(f"{path}: truncated payload for array {spec['name']}")
        weights[spec["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(raw):
        raise ModelFormatError(f"{path}: {len(raw) - offset} trailing bytes")

    return Model(encoder, tuple(header["classes"]), weights, header["schema_hash"])
