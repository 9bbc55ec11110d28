"""Experiment harness: method comparison tables, rank aggregation,
per-explainer survival accounting, and the barycentric utility sweep.

Nine method variants are compared: each base explainer on its own, a
random-selection ensemble baseline, and the full pipeline under the three
ideal-point distances. A base explainer's representative counterfactual is
its valid candidate with minimum proximity (ties by restart index); the
random baseline picks uniformly from the valid+actionable pool.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .blackbox import Model
from .data import Dataset, Instance
from .errors import ParameterError
from .explainers import EXPLAINER_ORDER, Candidate, run_ensemble
from .mcda import (
    SELECTION_DIRECTIONS,
    CriteriaBounds,
    Direction,
    SelectionResult,
    filter_actionable,
    filter_valid,
)
from .metrics import (
    REPORT_COLUMNS,
    REPORT_DIRECTIONS,
    InstabilityCalculator,
    InstanceOutcome,
    MethodSummary,
    aggregate_stats,
    criteria_for,
    proximity,
)
from .pipeline import PipelineConfig, explain

log = logging.getLogger("cfselect.evaluation")

BASELINE_RANDOM = "ensemble_random"
OURS_METHODS = {"ensemble_l1": "L1", "ensemble_l2": "L2", "ensemble_linf": "Linf"}
ALL_METHODS = tuple(EXPLAINER_ORDER) + (BASELINE_RANDOM,) + tuple(OURS_METHODS)


# -- rank aggregation ---------------------------------------------------------


@dataclass(frozen=True)
class MeasureMatrix:
    """Method-by-measure table with per-column optimization directions."""

    methods: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray
    directions: tuple[Direction, ...]

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.methods), len(self.columns)):
            raise ParameterError("measure matrix is not rectangular")
        if len(self.directions) != len(self.columns):
            raise ParameterError("one direction needed per column")


def rank_table(m: MeasureMatrix) -> dict[str, float]:
    """Average fractional rank per method; lower is better.

    Ranks are direction-aware per column; tied values share the mean of
    their positions. Missing cells (methods without coverage) are filled
    with the column-worst value first so such methods still rank.
    """
    values = m.values.astype(float).copy()
    for j, d in enumerate(m.directions):
        col = values[:, j]
        missing = np.isnan(col)
        if missing.any():
            finite = col[~missing]
            if finite.size == 0:
                col[missing] = 0.0
            else:
                col[missing] = finite.max() if d == Direction.MIN else finite.min()
            values[:, j] = col
    ranks = np.zeros_like(values)
    for j, d in enumerate(m.directions):
        col = values[:, j] if d == Direction.MIN else -values[:, j]
        ranks[:, j] = rankdata(col, method="average")
    avg = ranks.mean(axis=1)
    return {method: float(r) for method, r in zip(m.methods, avg)}


# -- survival accounting -------------------------------------------------------


@dataclass
class SurvivalRow:
    explainer: str
    all: float
    val: float
    act: float
    front: float
    ideal: float


def survival_table(results: Sequence[SelectionResult]) -> list[SurvivalRow]:
    """Per-explainer mean candidate counts after each pipeline stage.

    ``ideal`` is the fraction of instances whose final selection originated
    from that explainer, so the column sums to the overall coverage.
    """
    if not results:
        raise ParameterError("no results to summarize")
    explainers = sorted({c.explainer_id for r in results for c in r.candidates})
    totals = {e: np.zeros(5) for e in explainers}
    for r in results:
        front_ids = {id(c) for c, _ in r.front.members}
        per = {e: np.zeros(5) for e in explainers}
        for c in r.candidates:
            row = per[c.explainer_id]
            row[0] += 1
            if c.valid:
                row[1] += 1
                if c.actionable:
                    row[2] += 1
        for c, _ in r.front.members:
            per[c.explainer_id][3] += 1
        if r.chosen is not None:
            per[r.chosen.explainer_id][4] += 1
        for e in explainers:
            totals[e] += per[e]
    n = len(results)
    return [
        SurvivalRow(e, *(float(v) / n for v in totals[e])) for e in explainers
    ]


# -- utility sweep --------------------------------------------------------------


@dataclass(frozen=True)
class WeightTriple:
    w_p: float
    w_d: float
    w_f: float

    def __post_init__(self) -> None:
        total = self.w_p + self.w_d + self.w_f
        if min(self.w_p, self.w_d, self.w_f) < 0 or abs(total - 1.0) > 1e-9:
            raise ParameterError(f"weights must be a simplex point, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.w_p, self.w_f, self.w_d])  # (prox, feas, dpow) order


def barycentric_grid(step: Fraction | float | str | int) -> list[WeightTriple]:
    """All weight triples (i/n, j/n, k/n) with i+j+k = n, for step = 1/n."""
    frac = Fraction(step).limit_denominator(10**9)
    if frac <= 0 or frac.numerator != 1:
        raise ParameterError(f"step must be 1/n for integer n >= 1, got {step!r}")
    n = frac.denominator
    grid = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            k = n - i - j
            grid.append(WeightTriple(w_p=i / n, w_d=j / n, w_f=k / n))
    return grid


def utility(
    criteria: Sequence[float], weights: WeightTriple, bounds: CriteriaBounds
) -> float:
    """Weighted gain over the min-max normalized criteria; higher is better.

    All three terms are oriented to gain before weighting (proximity and
    feasibility flip to 1 - normalized), so maximizing the utility is
    well-posed regardless of the mix of weights.
    """
    oriented = bounds.apply(np.asarray(criteria, dtype=float)[None, :])[0]
    return float(1.0 - weights.as_array() @ oriented)


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[tuple[WeightTriple, str, float], ...]


def sweep(
    selected: dict[str, dict[int, tuple[float, float, float] | None]],
    step: Fraction | float | str | int,
) -> SweepResult:
    """For each weight triple, the method with the best mean utility.

    Per-method utilities average over the instances that method covered;
    normalization bounds are fitted over every method's selected
    counterfactual. Ties break by method name.
    """
    if not selected:
        raise ParameterError("no methods to sweep")
    all_vecs = [
        np.array(v) for per in selected.values() for v in per.values() if v is not None
    ]
    if not all_vecs:
        raise ParameterError("no selected counterfactuals to sweep")
    bounds = CriteriaBounds.fit(np.stack(all_vecs), SELECTION_DIRECTIONS)

    mean_oriented: dict[str, np.ndarray] = {}
    for method, per in selected.items():
        vecs = [np.array(v) for v in per.values() if v is not None]
        if vecs:
            mean_oriented[method] = bounds.apply(np.stack(vecs)).mean(axis=0)

    rows = []
    for w in barycentric_grid(step):
        best_method, best_u = None, -np.inf
        for method in sorted(mean_oriented):
            u = float(1.0 - w.as_array() @ mean_oriented[method])
            if u > best_u + 1e-15:
                best_method, best_u = method, u
        rows.append((w, best_method, best_u))
    return SweepResult(rows=tuple(rows))


# -- harness --------------------------------------------------------------------


@dataclass
class EvaluationArtifacts:
    dataset_name: str
    summaries: list[MethodSummary]
    ranks: dict[str, float]
    survival: list[SurvivalRow]
    selected_criteria: dict[str, dict[int, tuple[float, float, float] | None]]
    manifest: dict
    pipeline_results: dict[str, list[SelectionResult]] = field(default_factory=dict)


class _CandidateCache:
    """One ensemble run per unique instance id, shared across methods."""

    def __init__(self, data: Dataset, model: Model, cfg: PipelineConfig) -> None:
        self.data = data
        self.model = model
        self.cfg = cfg
        self._store: dict[int | None, list[Candidate]] = {}
        self._lock = threading.Lock()

    def get(self, x: Instance) -> list[Candidate]:
        with self._lock:
            if x.id in self._store:
                return self._store[x.id]
        cands = run_ensemble(x, self.data, self.model, self.cfg.explainers)
        with self._lock:
            self._store.setdefault(x.id, cands)
        return self._store[x.id]


def _desired(model: Model, x: Instance) -> str:
    current = model.predict(x)
    return [c for c in model.classes if c != current][0]


def _base_method_choice(
    method: str, x: Instance, cands: list[Candidate], data: Dataset, model: Model
) -> Candidate | None:
    desired = _desired(model, x)
    valid = [c for c in filter_valid(cands, model, desired) if c.explainer_id == method]
    if not valid:
        return None
    scored = sorted(
        ((proximity(x, Instance(values=c.values), data), c.restart, i) for i, c in enumerate(valid))
    )
    return valid[scored[0][2]]


def _random_choice(
    x: Instance, cands: list[Candidate], data: Dataset, model: Model, seed: int
) -> Candidate | None:
    desired = _desired(model, x)
    pool = filter_actionable(filter_valid(cands, model, desired), x, data.schema)
    if not pool:
        return None
    rng = np.random.default_rng((seed, 7919, x.id if x.id is not None else 0))
    return pool[int(rng.integers(0, len(pool)))]


def evaluate_dataset(
    data: Dataset,
    model: Model,
    cfg: PipelineConfig,
    n_instances: int,
    seed: int = 0,
    dataset_name: str = "dataset",
    workers: int = 1,
    config_hashes: dict[str, str] | None = None,
) -> EvaluationArtifacts:
    """Run every method variant over the first *n_instances* test rows."""
    instances = list(data.test_rows[:n_instances])
    if not instances:
        raise ParameterError("no test instances to evaluate")
    cache = _CandidateCache(data, model, cfg)
    ours_cache: dict[tuple[str, int | None], SelectionResult] = {}

    def ours_result(x: Instance, metric: str) -> SelectionResult:
        key = (metric, x.id)
        if key not in ours_cache:
            ours_cache[key] = explain(
                x, data, model,
                PipelineConfig(metric=metric, neighbor_k=cfg.neighbor_k,
                               explainers=cfg.explainers),
                candidates=cache.get(x),
            )
        return ours_cache[key]

    def method_cf(method: str, x: Instance) -> Instance | None:
        cands = cache.get(x)
        if method in OURS_METHODS:
            r = ours_result(x, OURS_METHODS[method])
            return Instance(values=r.chosen.values) if r.chosen else None
        if method == BASELINE_RANDOM:
            c = _random_choice(x, cands, data, model, seed)
        else:
            c = _base_method_choice(method, x, cands, data, model)
        return Instance(values=c.values) if c else None

    # warm the cache (optionally in parallel); everything downstream reuses it
    def warm(x: Instance) -> None:
        cache.get(x)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(warm, instances))
    else:
        for x in instances:
            warm(x)

    calculators = {
        m: InstabilityCalculator(data, lambda x, m=m: method_cf(m, x)) for m in ALL_METHODS
    }

    summaries: list[MethodSummary] = []
    selected_criteria: dict[str, dict[int, tuple[float, float, float] | None]] = {}
    pipeline_results: dict[str, list[SelectionResult]] = {m: [] for m in OURS_METHODS}

    for method in ALL_METHODS:
        outcomes: list[InstanceOutcome] = []
        per_instance: dict[int, tuple[float, float, float] | None] = {}
        for x in instances:
            if method in OURS_METHODS:
                r = ours_result(x, OURS_METHODS[method])
                pipeline_results[method].append(r)
                cf = Instance(values=r.chosen.values) if r.chosen else None
            else:
                cf = method_cf(method, x)
            if cf is None:
                outcomes.append(
                    InstanceOutcome(x.id, covered=False, actionable=False, criteria=None)
                )
                per_instance[x.id] = None
                continue
            cv = criteria_for(x, cf, data, model, cfg.neighbor_k)
            act = len(filter_actionable(
                [Candidate(values=cf.values, explainer_id=method, restart=0)],
                x, data.schema,
            )) == 1
            instab = calculators[method].instability(x)
            outcomes.append(
                InstanceOutcome(x.id, covered=True, actionable=act, criteria=cv,
                                instability=instab)
            )
            per_instance[x.id] = (cv.proximity, cv.feasibility, cv.dpow)
        summaries.append(aggregate_stats(method, outcomes))
        selected_criteria[method] = per_instance

    matrix = MeasureMatrix(
        methods=tuple(ALL_METHODS),
        columns=REPORT_COLUMNS,
        values=np.array([s.as_row() for s in summaries]),
        directions=REPORT_DIRECTIONS,
    )
    ranks = rank_table(matrix)

    primary = {v: k for k, v in OURS_METHODS.items()}.get(cfg.metric, "ensemble_l2")
    survival = survival_table(pipeline_results[primary])

    front_sizes = [r.counts.front for r in pipeline_results[primary]]
    act_sizes = [r.counts.actionable for r in pipeline_results[primary]]
    reductions = [
        1.0 - f / a for f, a in zip(front_sizes, act_sizes) if a > 0
    ]
    dominance_reduction = float(np.mean(reductions)) if reductions else float("nan")
    log.info("dominance step removed %.1f%% of valid+actionable candidates on average",
             100 * dominance_reduction)

    manifest = {
        "dataset": dataset_name,
        "n_instances": len(instances),
        "seed": seed,
        "neighbor_k": cfg.neighbor_k,
        "selection_metric": cfg.metric,
        "normalization": "per_query_candidate_set",
        "methods": list(ALL_METHODS),
        "explainer_config": {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in vars(cfg.explainers).items()
        },
        "dominance_reduction": dominance_reduction,
        "instability_missing": {s.method: s.instab_missing for s in summaries},
        "config_hashes": config_hashes or {},
    }
    return EvaluationArtifacts(
        dataset_name=dataset_name,
        summaries=summaries,
        ranks=ranks,
        survival=survival,
        selected_criteria=selected_criteria,
        manifest=manifest,
        pipeline_results=pipeline_results,
    )


# -- report files -----------------------------------------------------------------


def emit_reports(
    artifacts: EvaluationArtifacts,
    out_dir: str | Path,
    sweep_result: SweepResult | None = None,
) -> dict[str, Path]:
    """Write metrics/survival (and optionally sweep) CSVs plus the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = artifacts.dataset_name
    paths: dict[str, Path] = {}

    metrics_path = out / f"metrics_{name}.csv"
    with open(metrics_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", *REPORT_COLUMNS, "rank"])
        for s in artifacts.summaries:
            writer.writerow(
                [s.method]
                + [f"{v:.6g}" for v in s.as_row()]
                + [f"{artifacts.ranks[s.method]:.6g}"]
            )
    paths["metrics"] = metrics_path

    survival_path = out / f"survival_{name}.csv"
    with open(survival_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["explainer", "all", "val", "act", "front", "ideal"])
        for row in artifacts.survival:
            writer.writerow(
                [row.explainer]
                + [f"{v:.6g}" for v in (row.all, row.val, row.act, row.front, row.ideal)]
            )
    paths["survival"] = survival_path

    criteria_path = out / f"selected_criteria_{name}.json"
    with open(criteria_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                m: {str(k): (list(v) if v is not None else None) for k, v in per.items()}
                for m, per in artifacts.selected_criteria.items()
            },
            fh, indent=2, sort_keys=True,
        )
    paths["selected_criteria"] = criteria_path

    if sweep_result is not None:
        paths["sweep"] = write_sweep_csv(sweep_result, out / f"sweep_{name}.csv")

    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(artifacts.manifest, fh, indent=2, sort_keys=True)
    paths["manifest"] = manifest_path
    return paths


def write_sweep_csv(sweep_result: SweepResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["w_p", "w_d", "w_f", "winner"])
        for w, winner, _ in sweep_result.rows:
            writer.writerow([f"{w.w_p:.10g}", f"{w.w_d:.10g}", f"{w.w_f:.10g}", winner])
    return path


def load_selected_criteria(path: str | Path) -> dict[str, dict[int, tuple | None]]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return {
        m: {int(k): (tuple(v) if v is not None else None) for k, v in per.items()}
        for m, per in raw.items()
    }


def file_hash(path: str | Path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
