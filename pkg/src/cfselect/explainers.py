"""Base explainer ensemble.

Five lightweight explainers covering the common counterfactual paradigms:

* ``nun`` — instance-based: nearest training rows predicted as the target
  class.
* ``growing_spheres`` — random search in expanding HEOM shells with a
  shrinking refinement phase.
* ``wachter`` — penalized gradient descent on the target-class probability
  plus HEOM proximity, harvesting valid intermediate points.
* ``cadex`` — greedy per-feature edits ordered by probe saliency, swept
  over a budget of allowed feature changes.
* ``dice`` — randomized restarts of the gradient search with a repulsion
  term that pushes restarts apart, yielding a diverse candidate set.

Explainers only generate; validity and actionability enforcement is the
selection pipeline's job. The gradient/greedy explainers keep immutable
features frozen (they can honor the constraint natively); nun and
growing_spheres are constraint-unaware by design.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .blackbox import Model
from .data import Dataset, FeatureSchema, Instance, heom_to_train
from .errors import LoadError, ParameterError

log = logging.getLogger("cfselect.explainers")

EXPLAINER_ORDER = ("nun", "growing_spheres", "wachter", "cadex", "dice")


@dataclass(frozen=True)
class Candidate:
    """A counterfactual candidate with provenance."""

    values: tuple
    explainer_id: str
    restart: int
    predicted: str | None = None
    valid: bool | None = None
    actionable: bool | None = None
    criteria: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ExplainerConfig:
    seed: int = 0
    enabled: tuple[str, ...] = EXPLAINER_ORDER
    nun_k: int = 10
    gs_restarts: int = 20
    gs_samples_per_shell: int = 60
    gs_initial_radius: float = 0.25
    gs_radius_step: float = 0.25
    gs_refine_steps: int = 8
    wachter_k: int = 10
    wachter_lam: float = 10.0
    wachter_steps: int = 500
    wachter_step_size: float = 0.05
    wachter_flip_every: int = 75
    dice_restarts: int = 20
    dice_steps: int = 250
    dice_diversity_weight: float = 2.0
    dice_diversity_radius: float = 0.3
    cadex_caps: int = 14
    cadex_bisect_steps: int = 6

    def __post_init__(self) -> None:
        unknown = set(self.enabled) - set(EXPLAINER_ORDER)
        if unknown:
            raise ParameterError(f"unknown explainer ids: {sorted(unknown)}")
        for name in ("nun_k", "gs_restarts", "wachter_k", "dice_restarts", "cadex_caps"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")


# -- encoded search state --------------------------------------------------
#
# Search happens on (scaled continuous vector, category token list). HEOM
# between states is sqrt(sum of clipped squared scaled diffs + number of
# differing categories); scaled coordinates make the continuous HEOM terms
# plain absolute differences.


class _Space:
    def __init__(self, x: Instance, data: Dataset, model: Model, honor_immutable: bool):
        self.schema = data.schema
        self.enc = model.encoder
        self.model = model
        self.x = x
        self.x_cont = np.array(
            [self.enc.encode(x.values)[j] for j in range(self.enc.n_cont)]
        )
        self.x_cats = [x.values[i] for i in self.enc.cat_indices]
        imm = set(self.schema.immutable_indices) if honor_immutable else set()
        self.mut_cont_mask = np.array(
            [i not in imm for i in self.enc.cont_indices], dtype=bool
        )
        self.mut_cat_positions = [
            j for j, i in enumerate(self.enc.cat_indices) if i not in imm
        ]

    def encode_state(self, cont: np.ndarray, cats: Sequence[str]) -> np.ndarray:
        vec = np.zeros(self.enc.dim)
        vec[: self.enc.n_cont] = cont
        for j, cat in enumerate(cats):
            try:
                pos = self.enc.categories[j].index(cat)
            except ValueError:
                continue
            vec[self.enc.cat_offsets[j] + pos] = 1.0
        return vec

    def decode_state(self, cont: np.ndarray, cats: Sequence[str]) -> tuple:
        values = list(self.x.values)
        for j, i in enumerate(self.enc.cont_indices):
            values[i] = float(cont[j] * self.enc.width[j] + self.enc.lo[j])
        for j, i in enumerate(self.enc.cat_indices):
            values[i] = cats[j]
        return tuple(values)

    def proba_target(self, cont: np.ndarray, cats: Sequence[str], target: int) -> float:
        return float(self.model.proba_batch(self.encode_state(cont, cats))[0, target])

    def proba_target_batch(
        self, conts: np.ndarray, cats_list: Sequence[Sequence[str]], target: int
    ) -> np.ndarray:
        vecs = np.stack(
            [self.encode_state(c, k) for c, k in zip(conts, cats_list)]
        )
        return self.model.proba_batch(vecs)[:, target]

    def heom_state(self, cont: np.ndarray, cats: Sequence[str]) -> float:
        d = np.minimum(np.abs(cont - self.x_cont), 1.0)
        s = float(np.sum(d * d)) + sum(a != b for a, b in zip(cats, self.x_cats))
        return math.sqrt(s)

    def heom_between(
        self, cont_a: np.ndarray, cats_a: Sequence[str],
        cont_b: np.ndarray, cats_b: Sequence[str],
    ) -> float:
        d = np.minimum(np.abs(cont_a - cont_b), 1.0)
        s = float(np.sum(d * d)) + sum(a != b for a, b in zip(cats_a, cats_b))
        return math.sqrt(s)

    def heom_grad(self, cont: np.ndarray, cats: Sequence[str]) -> np.ndarray:
        """Gradient of heom_state w.r.t. the continuous coordinates."""
        h = self.heom_state(cont, cats)
        if h == 0.0:
            return np.zeros_like(cont)
        d = cont - self.x_cont
        g = np.where(np.abs(d) < 1.0, d / h, 0.0)
        return g

    def target_grad_cont(self, cont: np.ndarray, cats: Sequence[str], target: int) -> np.ndarray:
        vec = self.encode_state(cont, cats)
        return self.model.input_gradient(vec, target)[: self.enc.n_cont]


def _desired_label(model: Model, x: Instance, desired_class: str | None) -> str:
    current = model.predict(x)
    if desired_class is not None:
        return desired_class
    others = [c for c in model.classes if c != current]
    return others[0]


def _rng(cfg: ExplainerConfig, explainer: str, restart: int) -> np.random.Generator:
    return np.random.default_rng(
        (cfg.seed, EXPLAINER_ORDER.index(explainer), restart)
    )


# -- nun -------------------------------------------------------------------


def nearest_unlike_neighbors(
    x: Instance, data: Dataset, model: Model, cfg: ExplainerConfig,
    desired: str,
) -> list[Candidate]:
    """The cfg.nun_k nearest training rows the model predicts as *desired*."""
    preds = model.predict_batch(list(data.train_rows))
    dists = heom_to_train(x, data)
    rows = data.train_rows
    eligible = [
        (dists[i], rows[i].id if rows[i].id is not None else i, i)
        for i in range(len(rows))
        if preds[i] == desired
    ]
    eligible.sort()
    out = []
    for restart, (_, _, i) in enumerate(eligible[: cfg.nun_k]):
        out.append(
            Candidate(values=rows[i].values, explainer_id="nun", restart=restart)
        )
    return out


# -- growing spheres ---------------------------------------------------------


def _sample_shell(
    space: _Space, rng: np.random.Generator, lo: float, hi: float, n: int
) -> tuple[np.ndarray, list[list[str]]]:
    """Sample points with HEOM distance from x roughly inside [lo, hi].

    The squared-distance budget is split between a number of categorical
    flips (1 apiece) and a continuous displacement of the remaining radius.
    """
    n_cont = space.enc.n_cont
    n_cat = len(space.x_cats)
    conts = np.repeat(space.x_cont[None, :], n, axis=0)
    cats_list: list[list[str]] = []
    radii = rng.uniform(lo, hi, size=n)
    for s in range(n):
        budget = radii[s] ** 2
        cats = list(space.x_cats)
        max_flips = min(n_cat, int(budget))
        flips = int(rng.integers(0, max_flips + 1)) if max_flips > 0 else 0
        if flips > 0:
            for j in rng.choice(n_cat, size=flips, replace=False):
                options = [c for c in space.enc.categories[j] if c != space.x_cats[j]]
                if options:
                    cats[j] = options[int(rng.integers(0, len(options)))]
        cats_list.append(cats)
        remaining = budget - sum(a != b for a, b in zip(cats, space.x_cats))
        if n_cont > 0 and remaining > 0:
            direction = rng.normal(size=n_cont)
            norm = np.linalg.norm(direction)
            if norm > 0:
                conts[s] = np.clip(
                    space.x_cont + direction / norm * math.sqrt(remaining), 0.0, 1.0
                )
    return conts, cats_list


def growing_spheres(
    x: Instance, data: Dataset, model: Model, cfg: ExplainerConfig,
    desired: str, trace: dict[int, list[float]] | None = None,
) -> list[Candidate]:
    """Random search in expanding HEOM shells, then shrink toward the query.

    Each restart returns at most one candidate: its closest hit. Later
    refinement iterations only ever accept strictly closer points.
    """
    space = _Space(x, data, model, honor_immutable=False)
    target = model.class_index(desired)
    max_radius = math.sqrt(len(data.schema)) + 1e-9
    out = []
    for restart in range(cfg.gs_restarts):
        rng = _rng(cfg, "growing_spheres", restart)
        best: tuple[float, np.ndarray, list[str]] | None = None
        lo, hi = 0.0, cfg.gs_initial_radius
        while hi <= max_radius + cfg.gs_radius_step:
            conts, cats_list = _sample_shell(space, rng, lo, hi, cfg.gs_samples_per_shell)
            vecs = np.stack(
                [space.encode_state(conts[s], cats_list[s]) for s in range(len(cats_list))]
            )
            labels = np.argmax(model.proba_batch(vecs), axis=1)
            hits = [s for s in range(len(cats_list)) if model.classes[int(labels[s])] == desired]
            if hits:
                for s in hits:
                    d = space.heom_state(conts[s], cats_list[s])
                    if best is None or d < best[0]:
                        best = (d, conts[s].copy(), list(cats_list[s]))
                break
            lo, hi = hi, hi + cfg.gs_radius_step
        if best is None:
            log.info("growing_spheres restart %d found no hit", restart)
            continue
        if trace is not None:
            trace.setdefault(restart, []).append(best[0])
        for _ in range(cfg.gs_refine_steps):
            if best[0] <= 1e-9:
                break
            conts, cats_list = _sample_shell(
                space, rng, 0.0, best[0] * 0.95, cfg.gs_samples_per_shell
            )
            vecs = np.stack(
                [space.encode_state(conts[s], cats_list[s]) for s in range(len(cats_list))]
            )
            labels = np.argmax(model.proba_batch(vecs), axis=1)
            improved = False
            for s in range(len(cats_list)):
                if model.classes[int(labels[s])] != desired:
                    continue
                d = space.heom_state(conts[s], cats_list[s])
                if d < best[0]:
                    best = (d, conts[s].copy(), list(cats_list[s]))
                    improved = True
            if improved and trace is not None:
                trace[restart].append(best[0])
            if not improved:
                break
        out.append(
            Candidate(
                values=space.decode_state(best[1], best[2]),
                explainer_id="growing_spheres",
                restart=restart,
            )
        )
    return out


# -- gradient search (wachter / dice) ---------------------------------------


def _greedy_flip(
    space: _Space, cont: np.ndarray, cats: list[str], target: int
) -> list[str]:
    """One coordinate-wise greedy categorical flip, evaluated by model
    probability: apply the single category change that most increases the
    target-class probability, if any does."""
    base = space.proba_target(cont, cats, target)
    best, best_cats = base, None
    for j in space.mut_cat_positions:
        for option in space.enc.categories[j]:
            if option == cats[j]:
                continue
            trial = list(cats)
            trial[j] = option
            p = space.proba_target(cont, trial, target)
            if p > best + 1e-12:
                best, best_cats = p, trial
    return best_cats if best_cats is not None else cats


def _gradient_search(
    space: _Space,
    target: int,
    desired: str,
    rng: np.random.Generator,
    steps: int,
    step_size: float,
    lam: float,
    flip_every: int,
    init_noise: float = 0.0,
    repulsors: Sequence[tuple[np.ndarray, list[str]]] = (),
    repulsion_weight: float = 0.0,
    repulsion_radius: float = 0.0,
    harvest: bool = False,
) -> tuple[np.ndarray, list[str], list[tuple[np.ndarray, list[str]]]]:
    """Descend lam*(p_target-1)^2 + HEOM(x, u) over mutable continuous
    coordinates, with periodic greedy categorical flips and optional
    repulsion from previously found points."""

    def loss(cont: np.ndarray, cats: list[str]) -> float:
        p = space.proba_target(cont, cats, target)
        val = lam * (p - 1.0) ** 2 + space.heom_state(cont, cats)
        for r_cont, r_cats in repulsors:
            h = space.heom_between(cont, cats, r_cont, r_cats)
            if h < repulsion_radius:
                val += repulsion_weight * (repulsion_radius - h)
        return val

    cont = space.x_cont.copy()
    cats = list(space.x_cats)
    if init_noise > 0.0:
        noise = rng.normal(scale=init_noise, size=cont.shape)
        cont = np.clip(cont + noise * space.mut_cont_mask, 0.0, 1.0)

    harvested: list[tuple[np.ndarray, list[str]]] = []
    stall = 0
    prev_loss = float("inf")
    best_p = -1.0
    since_p_improved = 0
    for step in range(steps):
        p = space.proba_target(cont, cats, target)
        if p > best_p + 1e-9:
            best_p, since_p_improved = p, 0
        else:
            since_p_improved += 1
        grad = 2.0 * lam * (p - 1.0) * space.target_grad_cont(cont, cats, target)
        grad += space.heom_grad(cont, cats)
        if repulsion_weight > 0.0:
            for r_cont, r_cats in repulsors:
                h = space.heom_between(cont, cats, r_cont, r_cats)
                if 0.0 < h < repulsion_radius:
                    d = cont - r_cont
                    g = np.where(np.abs(d) < 1.0, d / h, 0.0)
                    grad += -repulsion_weight * g
        grad *= space.mut_cont_mask
        # normalized direction steps: the squared-probability term saturates
        # on confident models, so raw gradient magnitudes stall the search
        norm = np.linalg.norm(grad)
        if norm < 1e-12:
            kick = rng.normal(size=grad.shape) * space.mut_cont_mask
            kn = np.linalg.norm(kick)
            grad = kick / kn if kn > 0 else kick
        else:
            grad = grad / norm
        cont = np.clip(cont - step_size * grad, 0.0, 1.0)

        valid_now = (
            space.model.classes[
                int(np.argmax(space.model.proba_batch(space.encode_state(cont, cats))[0]))
            ]
            == desired
        )
        periodic = flip_every and (step + 1) % flip_every == 0
        stuck = not valid_now and since_p_improved >= 25
        if not valid_now and (periodic or stuck):
            cats = _greedy_flip(space, cont, cats, target)
            since_p_improved = 0
            valid_now = (
                space.model.classes[
                    int(np.argmax(space.model.proba_batch(space.encode_state(cont, cats))[0]))
                ]
                == desired
            )

        cur = loss(cont, cats)
        if harvest and valid_now:
            harvested.append((cont.copy(), list(cats)))
        if valid_now and abs(prev_loss - cur) < 1e-7:
            stall += 1
            if stall >= 20:
                break
        else:
            stall = 0
        prev_loss = cur
    return cont, cats, harvested


def wachter(
    x: Instance, data: Dataset, model: Model, cfg: ExplainerConfig, desired: str
) -> list[Candidate]:
    """One gradient run; the final point plus a seeded sample of valid
    intermediate points discovered along the trajectory."""
    space = _Space(x, data, model, honor_immutable=True)
    target = model.class_index(desired)
    rng = _rng(cfg, "wachter", 0)
    cont, cats, harvested = _gradient_search(
        space, target, desired, rng,
        steps=cfg.wachter_steps, step_size=cfg.wachter_step_size,
        lam=cfg.wachter_lam, flip_every=cfg.wachter_flip_every, harvest=True,
    )
    states = [(cont, cats)]
    pool = harvested[:-1] if harvested and np.array_equal(harvested[-1][0], cont) else harvested
    if pool and cfg.wachter_k > 1:
        take = min(cfg.wachter_k - 1, len(pool))
        picks = rng.choice(len(pool), size=take, replace=False)
        states.extend(pool[int(i)] for i in sorted(picks))
    out = []
    for restart, (c, k) in enumerate(states):
        out.append(
            Candidate(
                values=space.decode_state(c, k), explainer_id="wachter", restart=restart
            )
        )
    return out


def dice(
    x: Instance, data: Dataset, model: Model, cfg: ExplainerConfig, desired: str
) -> list[Candidate]:
    """Restarted gradient searches with repulsion from earlier finds."""
    space = _Space(x, data, model, honor_immutable=True)
    target = model.class_index(desired)
    found: list[tuple[np.ndarray, list[str]]] = []
    out = []
    for restart in range(cfg.dice_restarts):
        rng = _rng(cfg, "dice", restart)
        cont, cats, _ = _gradient_search(
            space, target, desired, rng,
            steps=cfg.dice_steps, step_size=cfg.wachter_step_size,
            lam=cfg.wachter_lam, flip_every=cfg.wachter_flip_every,
            init_noise=0.05 * (1 + restart % 5),
            repulsors=found,
            repulsion_weight=cfg.dice_diversity_weight,
            repulsion_radius=cfg.dice_diversity_radius,
        )
        found.append((cont, cats))
        out.append(
            Candidate(
                values=space.decode_state(cont, cats),
                explainer_id="dice",
                restart=restart,
            )
        )
    return out


# -- cadex -------------------------------------------------------------------


def _feature_probes(space: _Space, cont, cats, target):
    """Best achievable single-feature move from the current state.

    Returns (gain, kind, payload) per mutable feature, probing continuous
    features at both range ends and categorical ones at every other token.
    """
    base = space.proba_target(cont, cats, target)
    probes = []
    for j in range(space.enc.n_cont):
        if not space.mut_cont_mask[j]:
            continue
        gains = []
        for end in (0.0, 1.0):
            trial = cont.copy()
            trial[j] = end
            gains.append((space.proba_target(trial, cats, target) - base, end))
        gain, end = max(gains)
        probes.append((gain, "cont", (j, end)))
    for j in space.mut_cat_positions:
        best_gain, best_opt = -np.inf, None
        for option in space.enc.categories[j]:
            if option == cats[j]:
                continue
            trial = list(cats)
            trial[j] = option
            gain = space.proba_target(cont, trial, target) - base
            if gain > best_gain:
                best_gain, best_opt = gain, option
        if best_opt is not None:
            probes.append((best_gain, "cat", (j, best_opt)))
    probes.sort(key=lambda t: -t[0])
    return probes


def cadex(
    x: Instance, data: Dataset, model: Model, cfg: ExplainerConfig, desired: str
) -> list[Candidate]:
    """Greedy saliency-ordered feature edits under a changed-feature cap.

    One candidate per cap value 1..cfg.cadex_caps: the state reached after
    editing that many features. The sweep ends early when no edit helps or
    the flip is comfortable (target probability >= 0.9). The edit that
    first flips the class is bisected back toward the query to shrink the
    change while staying valid.
    """
    space = _Space(x, data, model, honor_immutable=True)
    target = model.class_index(desired)
    cont = space.x_cont.copy()
    cats = list(space.x_cats)

    def is_valid(c, k) -> bool:
        probs = space.model.proba_batch(space.encode_state(c, k))[0]
        return space.model.classes[int(np.argmax(probs))] == desired

    snapshots: list[tuple[np.ndarray, list[str]]] = []
    edited: set[tuple[str, int]] = set()
    flipped = False
    max_caps = cfg.cadex_caps
    while len(snapshots) < max_caps:
        if flipped and space.proba_target(cont, cats, target) >= 0.9:
            break
        probes = [
            p for p in _feature_probes(space, cont, cats, target)
            if (p[1], p[2][0]) not in edited
        ]
        if not probes:
            break
        gain, kind, payload = probes[0]
        if gain <= 1e-12:
            break
        if kind == "cont":
            j, end = payload
            cont = cont.copy()
            cont[j] = end
            if not flipped and is_valid(cont, cats):
                # shrink the flipping move while the flip holds
                lo_t, hi_t = 0.0, 1.0
                start = space.x_cont[j]
                for _ in range(cfg.cadex_bisect_steps):
                    mid = (lo_t + hi_t) / 2
                    trial = cont.copy()
                    trial[j] = start + mid * (end - start)
                    if is_valid(trial, cats):
                        hi_t = mid
                    else:
                        lo_t = mid
                cont[j] = start + hi_t * (end - start)
                flipped = True
        else:
            j, option = payload
            cats = list(cats)
            cats[j] = option
            flipped = flipped or is_valid(cont, cats)
        edited.add((kind, payload[0]))
        snapshots.append((cont.copy(), list(cats)))

    out = []
    for restart, (c, k) in enumerate(snapshots):
        out.append(
            Candidate(
                values=space.decode_state(c, k), explainer_id="cadex", restart=restart
            )
        )
    return out


# -- dispatch ----------------------------------------------------------------

_EXPLAINERS: dict[str, Callable] = {
    "nun": nearest_unlike_neighbors,
    "growing_spheres": growing_spheres,
    "wachter": wachter,
    "cadex": cadex,
    "dice": dice,
}


def generate(
    explainer_id: str,
    x: Instance,
    data: Dataset,
    model: Model,
    cfg: ExplainerConfig,
    desired_class: str | None = None,
) -> list[Candidate]:
    """Run one explainer; candidates come back with predictions populated.

    An empty result is a coverage miss, not an error.
    """
    if explainer_id not in _EXPLAINERS:
        raise ParameterError(f"unknown explainer {explainer_id!r}")
    desired = _desired_label(model, x, desired_class)
    cands = _EXPLAINERS[explainer_id](x, data, model, cfg, desired)
    if not cands:
        log.info("explainer %s produced no candidates", explainer_id)
        return []
    preds = model.predict_batch([Instance(values=c.values) for c in cands])
    return [replace(c, predicted=p) for c, p in zip(cands, preds)]


def run_ensemble(
    x: Instance,
    data: Dataset,
    model: Model,
    cfg: ExplainerConfig,
    desired_class: str | None = None,
) -> list[Candidate]:
    """All enabled explainers in canonical order, deduplicated.

    Provenance (explainer id, restart) is preserved; exact value duplicates
    keep their first occurrence. Individual explainer failures are logged
    and skipped so one broken search cannot sink the ensemble.
    """
    combined: list[Candidate] = []
    for explainer_id in EXPLAINER_ORDER:
        if explainer_id not in cfg.enabled:
            continue
        try:
            combined.extend(
                generate(explainer_id, x, data, model, cfg, desired_class)
            )
        except Exception:
            log.exception("explainer %s failed; skipping", explainer_id)
    seen: set[tuple] = set()
    unique = []
    for c in combined:
        if c.values in seen:
            continue
        seen.add(c.values)
        unique.append(c)
    return unique


# -- candidate dump (JSON lines) ----------------------------------------------


def dump_candidates(path: str | Path, cands: Sequence[Candidate]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in cands:
            rec: dict = {
                "values": list(c.values),
                "explainer": c.explainer_id,
                "restart": c.restart,
                "predicted": c.predicted,
            }
            if c.criteria is not None:
                rec["criteria"] = {
                    "proximity": c.criteria[0],
                    "feasibility": c.criteria[1],
                    "dpow": c.criteria[2],
                }
            fh.write(json.dumps(rec) + "\n")


@dataclass(frozen=True)
class CandidateDump:
    """Parsed candidate dump, optionally with an embedded query record."""

    candidates: tuple[Candidate, ...]
    query: Instance | None = None
    query_predicted: str | None = None
    desired_class: str | None = None
    schema: FeatureSchema | None = None


def load_candidates(path: str | Path) -> CandidateDump:
    """Read a JSON-lines candidate dump.

    A line with ``"kind": "query"`` carries the query instance, its
    prediction, the desired class and an embedded schema; at most one such
    line is allowed. All other lines are candidates.
    """
    query = None
    query_predicted = None
    desired = None
    schema = None
    cands: list[Candidate] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LoadError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            if rec.get("kind") == "query":
                if query is not None:
                    raise LoadError(f"{path}:{lineno}: duplicate query record")
                query = Instance(values=tuple(rec["values"]), id=rec.get("id"))
                query_predicted = rec.get("predicted")
                desired = rec.get("desired_class")
                if "schema" in rec:
                    schema = FeatureSchema.from_json(rec["schema"])
                continue
            criteria = None
            if "criteria" in rec:
                c = rec["criteria"]
                criteria = (c["proximity"], c["feasibility"], c["dpow"])
            cands.append(
                Candidate(
                    values=tuple(rec["values"]),
                    explainer_id=rec.get("explainer", "unknown"),
                    restart=int(rec.get("restart", 0)),
                    predicted=rec.get("predicted"),
                    criteria=criteria,
                )
            )
    return CandidateDump(
        candidates=tuple(cands),
        query=query,
        query_predicted=query_predicted,
        desired_class=desired,
        schema=schema,
    )
