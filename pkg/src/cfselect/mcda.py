"""Multi-criteria selection: filters, dominance, Pareto front, ideal point.

The selection pipeline treats candidate counterfactuals as alternatives
scored on (proximity min, feasibility min, discriminative power max). After
min-max normalization every criterion is oriented so that smaller is
better, which puts the ideal point at the origin whenever each
per-criterion optimum survives to the front (a per-criterion strict
optimum is never dominated, so with unique optima this always holds).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .data import FeatureSchema, Instance
from .errors import ParameterError
from .explainers import Candidate

L1, L2, LINF, NADIR_PLANE = "L1", "L2", "Linf", "nadir_plane"
SELECTION_METRICS = (L1, L2, LINF, NADIR_PLANE)


class Direction(str, Enum):
    MIN = "min"
    MAX = "max"


# Fixed directions of the three selection criteria.
SELECTION_DIRECTIONS: tuple[Direction, ...] = (Direction.MIN, Direction.MIN, Direction.MAX)


def _coerce_dirs(dirs: Sequence) -> tuple[Direction, ...]:
    """Accept Direction members or their string values; reject anything else."""
    try:
        return tuple(Direction(d) for d in dirs)
    except ValueError as exc:
        raise ParameterError(f"bad optimization direction in {tuple(dirs)!r}") from exc


def filter_valid(
    cands: Sequence[Candidate], model, desired_class: str
) -> list[Candidate]:
    """Keep candidates whose prediction equals the desired class.

    Predictions missing on a candidate are populated through *model* first;
    order is preserved and an empty result is fine.
    """
    out = []
    for c in cands:
        predicted = c.predicted
        if predicted is None:
            if model is None:
                raise ParameterError("candidate without prediction and no model given")
            predicted = model.predict(Instance(values=c.values))
        if predicted == desired_class:
            out.append(c)
    return out


def filter_actionable(
    cands: Sequence[Candidate], x: Instance, schema: FeatureSchema
) -> list[Candidate]:
    """Drop candidates that modify any immutable feature of the query."""
    imm = schema.immutable_indices
    if not imm:
        return list(cands)
    out = []
    for c in cands:
        if all(_feature_equal(schema, i, c.values[i], x.values[i]) for i in imm):
            out.append(c)
    return out


def _feature_equal(schema: FeatureSchema, i: int, a, b) -> bool:
    if schema.features[i].kind == "continuous":
        return abs(float(a) - float(b)) <= 1e-9
    return a == b


def dominates(
    a: Sequence[float], b: Sequence[float], dirs: Sequence[Direction]
) -> bool:
    """True iff *a* is at least as good as *b* everywhere and strictly better once."""
    if not (len(a) == len(b) == len(dirs)):
        raise ParameterError(
            f"criteria arity mismatch: {len(a)}, {len(b)}, {len(dirs)} directions"
        )
    dirs = _coerce_dirs(dirs)
    at_least_as_good = True
    strictly_better = False
    for av, bv, d in zip(a, b, dirs):
        if d == Direction.MAX:
            av, bv = -av, -bv
        if av > bv:
            at_least_as_good = False
            break
        if av < bv:
            strictly_better = True
    return at_least_as_good and strictly_better


@dataclass
class ParetoFront:
    """Non-dominated subset; duplicates on criteria are all retained."""

    members: list[tuple[Candidate, np.ndarray]]
    dominated_count: int

    def __len__(self) -> int:
        return len(self.members)

    def criteria_matrix(self) -> np.ndarray:
        if not self.members:
            return np.zeros((0, 0))
        return np.stack([c for _, c in self.members])


def _oriented(matrix: np.ndarray, dirs: Sequence[Direction]) -> np.ndarray:
    signs = np.array([1.0 if d == Direction.MIN else -1.0 for d in dirs])
    return matrix * signs


def non_dominated_mask(matrix: np.ndarray, dirs: Sequence[Direction]) -> np.ndarray:
    """Boolean mask of rows not dominated by any other row.

    Single broadcasted comparison over all pairs; fine for the candidate-set
    sizes the ensemble produces (tens to a few hundred).
    """
    n = matrix.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    m = _oriented(matrix, _coerce_dirs(dirs))
    le = np.all(m[:, None, :] <= m[None, :, :], axis=2)
    lt = np.any(m[:, None, :] < m[None, :, :], axis=2)
    dominated = np.any(le & lt, axis=0)
    return ~dominated


def pareto_front(
    cands: Sequence[tuple[Candidate, Sequence[float]]],
    dirs: Sequence[Direction] = SELECTION_DIRECTIONS,
) -> ParetoFront:
    """Exact non-dominated subset of the scored candidates."""
    if not cands:
        return ParetoFront(members=[], dominated_count=0)
    matrix = np.array([list(v) for _, v in cands], dtype=np.float64)
    if matrix.shape[1] != len(dirs):
        raise ParameterError(
            f"criteria arity {matrix.shape[1]} does not match {len(dirs)} directions"
        )
    mask = non_dominated_mask(matrix, dirs)
    members = [(cands[i][0], matrix[i]) for i in range(len(cands)) if mask[i]]
    return ParetoFront(members=members, dominated_count=int((~mask).sum()))


@dataclass(frozen=True)
class CriteriaBounds:
    """Per-criterion min/max used for min-max normalization."""

    lo: np.ndarray
    hi: np.ndarray
    dirs: tuple[Direction, ...]

    @classmethod
    def fit(cls, matrix: np.ndarray, dirs: Sequence[Direction]) -> "CriteriaBounds":
        if matrix.size == 0:
            raise ParameterError("cannot fit bounds on an empty criteria set")
        return cls(
            lo=matrix.min(axis=0), hi=matrix.max(axis=0), dirs=_coerce_dirs(dirs)
        )

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        """Normalize to [0,1] and orient every criterion to min.

        Max criteria are inverted via (1 - normalized); a zero-spread
        criterion maps to 0 for all alternatives.
        """
        span = self.hi - self.lo
        with np.errstate(divide="ignore", invalid="ignore"):
            norm = np.where(span > 0, (matrix - self.lo) / span, 0.0)
        for j, d in enumerate(self.dirs):
            if d == Direction.MAX and span[j] > 0:
                norm[..., j] = 1.0 - norm[..., j]
            elif d == Direction.MAX:
                norm[..., j] = 0.0
        return norm


def normalize_criteria(
    matrix: np.ndarray, dirs: Sequence[Direction] = SELECTION_DIRECTIONS
) -> tuple[np.ndarray, CriteriaBounds]:
    """Min-max normalize a criteria matrix, orienting everything to min."""
    matrix = np.asarray(matrix, dtype=np.float64)
    bounds = CriteriaBounds.fit(matrix, dirs)
    return bounds.apply(matrix), bounds


@dataclass(frozen=True)
class IdealPoint:
    """Best attained value per criterion over the front."""

    raw: np.ndarray          # in raw criteria units (min or max per direction)
    normalized: np.ndarray   # image in normalized, min-oriented space


@dataclass
class SurvivalCounts:
    all: int
    valid: int
    actionable: int
    front: int
    chosen: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.all, self.valid, self.actionable, self.front, self.chosen)


@dataclass
class SelectionResult:
    chosen: Candidate | None
    front: ParetoFront
    ideal: IdealPoint | None
    counts: SurvivalCounts
    distance_metric: str
    chosen_criteria: np.ndarray | None = None
    candidates: list[Candidate] = field(default_factory=list, repr=False)
    # criteria of every valid+actionable candidate, for auditing dominance
    survivor_criteria: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> str:
        payload = {
            "metric": self.distance_metric,
            "counts": {
                "all": self.counts.all,
                "valid": self.counts.valid,
                "actionable": self.counts.actionable,
                "front": self.counts.front,
                "chosen": self.counts.chosen,
            },
            "front_criteria": [list(map(float, v)) for _, v in self.front.members],
            "ideal": None
            if self.ideal is None
            else {
                "raw": [float(v) for v in self.ideal.raw],
                "normalized": [float(v) for v in self.ideal.normalized],
            },
            "chosen": None
            if self.chosen is None
            else {
                "values": list(self.chosen.values),
                "explainer": self.chosen.explainer_id,
                "restart": self.chosen.restart,
                "predicted": self.chosen.predicted,
                "criteria": None
                if self.chosen_criteria is None
                else [float(v) for v in self.chosen_criteria],
            },
        }
        return json.dumps(payload, sort_keys=True)


def _ideal_from_front(
    matrix: np.ndarray, normalized: np.ndarray, dirs: Sequence[Direction]
) -> IdealPoint:
    raw = np.array(
        [
            matrix[:, j].max() if d == Direction.MAX else matrix[:, j].min()
            for j, d in enumerate(dirs)
        ]
    )
    return IdealPoint(raw=raw, normalized=normalized.min(axis=0))


def _distance_to_ideal(normalized: np.ndarray, ideal: np.ndarray, metric: str) -> np.ndarray:
    diff = np.abs(normalized - ideal)
    if metric == L1:
        return diff.sum(axis=1)
    if metric == L2:
        return np.sqrt((diff * diff).sum(axis=1))
    if metric == LINF:
        return diff.max(axis=1)
    raise ParameterError(f"unknown selection metric {metric!r}")


def _empty_result(metric: str) -> SelectionResult:
    return SelectionResult(
        chosen=None,
        front=ParetoFront(members=[], dominated_count=0),
        ideal=None,
        counts=SurvivalCounts(0, 0, 0, 0, 0),
        distance_metric=metric,
    )


def select_ideal(
    front: ParetoFront,
    metric: str = L2,
    bounds: CriteriaBounds | None = None,
    dirs: Sequence[Direction] = SELECTION_DIRECTIONS,
) -> SelectionResult:
    """Pick the front member closest to the ideal point.

    Distances are computed in normalized space with all criteria oriented to
    min. *bounds* should be fitted on the full valid+actionable candidate
    set; when omitted they are fitted on the front itself. Ties break by
    position, i.e. provenance order. An empty front yields a no-solution
    result (a coverage miss, not an error).
    """
    if metric not in (L1, L2, LINF):
        raise ParameterError(f"unknown selection metric {metric!r}")
    if not front.members:
        return _empty_result(metric)
    matrix = front.criteria_matrix()
    if bounds is None:
        bounds = CriteriaBounds.fit(matrix, dirs)
    normalized = bounds.apply(matrix)
    ideal = _ideal_from_front(matrix, normalized, dirs)
    dists = _distance_to_ideal(normalized, ideal.normalized, metric)
    best = int(np.argmin(dists))
    chosen, chosen_criteria = front.members[best]
    n = len(front.members)
    return SelectionResult(
        chosen=chosen,
        front=front,
        ideal=ideal,
        counts=SurvivalCounts(n, n, n, n, 1),
        distance_metric=metric,
        chosen_criteria=chosen_criteria,
    )


def select_nadir_plane(
    front: ParetoFront,
    bounds: CriteriaBounds | None = None,
    dirs: Sequence[Direction] = SELECTION_DIRECTIONS,
) -> SelectionResult:
    """Variant selection: distance to the plane through the ideal point
    orthogonal to the ideal-nadir axis, in normalized space.

    Equivalently: project members onto the ideal-nadir axis and take the one
    whose projection sits nearest the ideal. Falls back to L2 ideal-point
    selection when ideal and nadir coincide.
    """
    if not front.members:
        return _empty_result(NADIR_PLANE)
    matrix = front.criteria_matrix()
    if bounds is None:
        bounds = CriteriaBounds.fit(matrix, dirs)
    normalized = bounds.apply(matrix)
    ideal = _ideal_from_front(matrix, normalized, dirs)
    nadir = normalized.max(axis=0)
    axis = nadir - ideal.normalized
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        result = select_ideal(front, L2, bounds, dirs)
        result.distance_metric = NADIR_PLANE
        return result
    along = (normalized - ideal.normalized) @ (axis / norm)
    best = int(np.argmin(along))
    chosen, chosen_criteria = front.members[best]
    n = len(front.members)
    return SelectionResult(
        chosen=chosen,
        front=front,
        ideal=ideal,
        counts=SurvivalCounts(n, n, n, n, 1),
        distance_metric=NADIR_PLANE,
        chosen_criteria=chosen_criteria,
    )
