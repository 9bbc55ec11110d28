"""Quality measures for counterfactuals plus per-method summary statistics.

Selection criteria and their directions: proximity (min), feasibility
(min), discriminative power (max). The extended report adds sparsity (min),
instability (min), coverage (max) and actionability (max). Neighbor
searches always run against the training split.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import Dataset, Instance, heom_distance, knn
from .errors import ParameterError
from .mcda import Direction

DEFAULT_NEIGHBORS = 5

REPORT_COLUMNS = ("prox", "feas", "dpow", "spars", "instab", "cover", "act")
REPORT_DIRECTIONS = (
    Direction.MIN, Direction.MIN, Direction.MAX, Direction.MIN,
    Direction.MIN, Direction.MAX, Direction.MAX,
)


@dataclass(frozen=True)
class CriteriaVector:
    """Scores of one candidate on the selection criteria."""

    proximity: float
    feasibility: float
    dpow: float
    sparsity: int | None = None
    instability: float | None = None

    def selection_array(self) -> np.ndarray:
        return np.array([self.proximity, self.feasibility, self.dpow])


def proximity(x: Instance, x_prime: Instance, data: Dataset) -> float:
    """HEOM distance between the query and the counterfactual."""
    return heom_distance(x, x_prime, data.schema, data.ranges)


def feasibility(x_prime: Instance, data: Dataset, k: int = DEFAULT_NEIGHBORS) -> float:
    """Mean HEOM distance from x' to its k nearest training rows."""
    neighbors = knn(x_prime, data, k)
    return float(np.mean([d for _, d in neighbors]))


def sparsity(x: Instance, x_prime: Instance, data: Dataset, tol: float = 1e-9) -> int:
    """Number of features changed; continuous compared with tolerance."""
    count = 0
    for i, f in enumerate(data.schema.features):
        if f.kind == "continuous":
            if abs(float(x.values[i]) - float(x_prime.values[i])) > tol:
                count += 1
        elif x.values[i] != x_prime.values[i]:
            count += 1
    return count


def discriminative_power(
    x_prime: Instance, data: Dataset, model, k: int = DEFAULT_NEIGHBORS
) -> float:
    """Fraction of x''s k nearest training rows predicted like x' itself."""
    own = model.predict(x_prime)
    neighbors = knn(x_prime, data, k)
    preds = model.predict_batch([r for r, _ in neighbors])
    return float(np.mean([p == own for p in preds]))


def criteria_for(
    x: Instance, x_prime: Instance, data: Dataset, model, k: int = DEFAULT_NEIGHBORS
) -> CriteriaVector:
    return CriteriaVector(
        proximity=proximity(x, x_prime, data),
        feasibility=feasibility(x_prime, data, k),
        dpow=discriminative_power(x_prime, data, model, k),
        sparsity=sparsity(x, x_prime, data),
    )


class InstabilityCalculator:
    """Distance between the counterfactuals of a query and of its nearest
    training neighbor, under one deterministic end-to-end procedure.

    The procedure maps an Instance to a counterfactual Instance or None.
    Results are memoized per instance id behind a lock so parallel
    evaluation threads share the cache.
    """

    def __init__(
        self, data: Dataset, procedure: Callable[[Instance], Instance | None]
    ) -> None:
        self.data = data
        self.procedure = procedure
        self._cache: dict[int | None, Instance | None] = {}
        self._lock = threading.Lock()

    def counterfactual_of(self, x: Instance) -> Instance | None:
        key = x.id
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        result = self.procedure(x)
        with self._lock:
            self._cache[key] = result
        return result

    def instability(self, x: Instance) -> float | None:
        """None when either counterfactual is missing (reported, not averaged)."""
        x1, _ = knn(x, self.data, k=1, exclude_self=True)[0]
        cf_x = self.counterfactual_of(x)
        cf_x1 = self.counterfactual_of(x1)
        if cf_x is None or cf_x1 is None:
            return None
        return heom_distance(cf_x, cf_x1, self.data.schema, self.data.ranges)


@dataclass(frozen=True)
class InstanceOutcome:
    """One method's result on one query instance."""

    instance_id: int | None
    covered: bool
    actionable: bool
    criteria: CriteriaVector | None
    instability: float | None = None


@dataclass(frozen=True)
class MethodSummary:
    """One row of the comparison table (REPORT_COLUMNS layout)."""

    method: str
    prox: float
    feas: float
    dpow: float
    spars: float
    instab: float
    cover: float
    act: float
    instab_missing: int = 0

    def as_row(self) -> list[float]:
        return [self.prox, self.feas, self.dpow, self.spars, self.instab,
                self.cover, self.act]


def aggregate_stats(method: str, outcomes: Sequence[InstanceOutcome]) -> MethodSummary:
    """Mean measures over covered instances plus coverage/actionability ratios."""
    if not outcomes:
        raise ParameterError("no outcomes to aggregate")
    n = len(outcomes)
    covered = [o for o in outcomes if o.covered]
    cover = len(covered) / n
    act = sum(1 for o in covered if o.actionable) / n

    def mean_of(values: list[float]) -> float:
        return float(np.mean(values)) if values else float("nan")

    instabs = [o.instability for o in covered if o.instability is not None]
    return MethodSummary(
        method=method,
        prox=mean_of([o.criteria.proximity for o in covered]),
        feas=mean_of([o.criteria.feasibility for o in covered]),
        dpow=mean_of([o.criteria.dpow for o in covered]),
        spars=mean_of([float(o.criteria.sparsity) for o in covered]),
        instab=mean_of(instabs),
        cover=cover,
        act=act,
        instab_missing=len(covered) - len(instabs),
    )
