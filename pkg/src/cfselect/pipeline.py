"""End-to-end explanation of one query instance.

Four stages: run the explainer ensemble, enforce validity and
actionability, reduce to the Pareto front, select one counterfactual with
the ideal-point method (or its nadir-plane variant). A candidate dump can
stand in for live generation, which also carries precomputed criteria for
replaying recorded walkthroughs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .blackbox import Model
from .data import Dataset, Instance
from .errors import ParameterError
from .explainers import Candidate, ExplainerConfig, run_ensemble
from .mcda import (
    L2,
    NADIR_PLANE,
    SELECTION_DIRECTIONS,
    SELECTION_METRICS,
    CriteriaBounds,
    SelectionResult,
    SurvivalCounts,
    filter_actionable,
    filter_valid,
    pareto_front,
    select_ideal,
    select_nadir_plane,
)
from .metrics import DEFAULT_NEIGHBORS, criteria_for


@dataclass(frozen=True)
class PipelineConfig:
    metric: str = L2
    neighbor_k: int = DEFAULT_NEIGHBORS
    explainers: ExplainerConfig = ExplainerConfig()

    def __post_init__(self) -> None:
        if self.metric not in SELECTION_METRICS:
            raise ParameterError(f"unknown selection metric {self.metric!r}")


def desired_class_for(model: Model, x: Instance, desired: str | None = None) -> str:
    if desired is not None:
        if desired not in model.classes:
            raise ParameterError(f"unknown class {desired!r}")
        return desired
    current = model.predict(x)
    return [c for c in model.classes if c != current][0]


def explain(
    x: Instance,
    data: Dataset,
    model: Model,
    cfg: PipelineConfig,
    desired_class: str | None = None,
    candidates: list[Candidate] | None = None,
) -> SelectionResult:
    """Produce one compromise counterfactual for *x* (or a coverage miss).

    With *candidates* given, generation is skipped and the provided dump is
    filtered/selected instead; stored criteria are honored, anything
    missing is computed against the dataset and model.
    """
    desired = desired_class_for(model, x, desired_class)
    if candidates is None:
        candidates = run_ensemble(x, data, model, cfg.explainers, desired)
    n_all = len(candidates)

    valid = filter_valid(candidates, model, desired)
    valid_set = {id(c) for c in valid}
    actionable_set = {id(c) for c in filter_actionable(candidates, x, data.schema)}
    survivors = filter_actionable(valid, x, data.schema)

    annotated = [
        replace(c, valid=id(c) in valid_set, actionable=id(c) in actionable_set)
        for c in candidates
    ]

    if not survivors:
        result = SelectionResult(
            chosen=None,
            front=pareto_front([], SELECTION_DIRECTIONS),
            ideal=None,
            counts=SurvivalCounts(n_all, len(valid), 0, 0, 0),
            distance_metric=cfg.metric,
        )
        result.candidates = annotated
        return result

    scored = []
    for c in survivors:
        if c.criteria is not None:
            vec = np.array(c.criteria, dtype=np.float64)
        else:
            cv = criteria_for(x, Instance(values=c.values), data, model, cfg.neighbor_k)
            vec = cv.selection_array()
        scored.append((c, vec))

    matrix = np.stack([v for _, v in scored])
    bounds = CriteriaBounds.fit(matrix, SELECTION_DIRECTIONS)
    front = pareto_front(scored, SELECTION_DIRECTIONS)

    if cfg.metric == NADIR_PLANE:
        result = select_nadir_plane(front, bounds)
    else:
        result = select_ideal(front, cfg.metric, bounds)

    result.counts = SurvivalCounts(
        all=n_all,
        valid=len(valid),
        actionable=len(survivors),
        front=len(front),
        chosen=1 if result.chosen is not None else 0,
    )
    result.candidates = annotated
    result.survivor_criteria = matrix
    return result


def chosen_instance(result: SelectionResult) -> Instance | None:
    if result.chosen is None:
        return None
    return Instance(values=result.chosen.values)


def replay(dump, metric: str = L2) -> SelectionResult:
    """Run the filter/front/selection stages over a recorded candidate dump.

    Needs no dataset or model: validity comes from the stored predictions,
    actionability from the dump's embedded schema and query, and the
    criteria from the stored per-candidate scores.
    """
    if dump.query is None or dump.schema is None or dump.desired_class is None:
        raise ParameterError("dump lacks a query record with schema and desired_class")
    candidates = list(dump.candidates)
    n_all = len(candidates)

    valid = [c for c in candidates if c.predicted == dump.desired_class]
    valid_set = {id(c) for c in valid}
    actionable_set = {id(c) for c in filter_actionable(candidates, dump.query, dump.schema)}
    survivors = [c for c in valid if id(c) in actionable_set]

    annotated = [
        replace(c, valid=id(c) in valid_set, actionable=id(c) in actionable_set)
        for c in candidates
    ]

    if not survivors:
        result = SelectionResult(
            chosen=None,
            front=pareto_front([], SELECTION_DIRECTIONS),
            ideal=None,
            counts=SurvivalCounts(n_all, len(valid), 0, 0, 0),
            distance_metric=metric,
        )
        result.candidates = annotated
        return result

    missing = [c for c in survivors if c.criteria is None]
    if missing:
        raise ParameterError(
            f"{len(missing)} surviving candidates lack stored criteria; "
            "replay cannot score them"
        )
    scored = [(c, np.array(c.criteria, dtype=np.float64)) for c in survivors]
    matrix = np.stack([v for _, v in scored])
    bounds = CriteriaBounds.fit(matrix, SELECTION_DIRECTIONS)
    front = pareto_front(scored, SELECTION_DIRECTIONS)

    if metric == NADIR_PLANE:
        result = select_nadir_plane(front, bounds)
    else:
        result = select_ideal(front, metric, bounds)
    result.counts = SurvivalCounts(
        all=n_all, valid=len(valid), actionable=len(survivors),
        front=len(front), chosen=1 if result.chosen is not None else 0,
    )
    result.candidates = annotated
    result.survivor_criteria = matrix
    return result
