"""Command-line surface: train, explain, evaluate, sweep.

One YAML run config drives every command; flags override config keys.
Exit codes: 0 success (including covered "no counterfactual" outcomes),
2 config error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import yaml

from . import evaluation
from .blackbox import TrainConfig, load_model, save_model, train
from .data import Instance, load_dataset
from .errors import CfselectError, ConfigError, LoadError, ParameterError
from .explainers import ExplainerConfig, load_candidates
from .mcda import L2, SELECTION_METRICS, SelectionResult
from .metrics import DEFAULT_NEIGHBORS
from .pipeline import PipelineConfig, desired_class_for, explain, replay

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_run_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "r", encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"bad YAML in {p}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {p} must be a mapping")
    cfg["_config_path"] = str(p)
    return cfg


def _require(cfg: dict, key: str, flag: str) -> str:
    value = cfg.get(key)
    if value is None:
        raise ConfigError(f"missing {key!r}: set it in the config or pass {flag}")
    return value


def _existing_path(value: str, what: str) -> Path:
    p = Path(value)
    if not p.exists():
        raise ConfigError(f"{what} not found: {p}")
    return p


def _train_config(cfg: dict, seed: int) -> TrainConfig:
    section = dict(cfg.get("train", {}))
    section.setdefault("seed", seed)
    if "hidden" in section:
        section["hidden"] = tuple(section["hidden"])
    try:
        return TrainConfig(**section)
    except (TypeError, ParameterError) as exc:
        raise ConfigError(f"bad train config: {exc}") from exc


def _explainer_config(cfg: dict, seed: int) -> ExplainerConfig:
    section = dict(cfg.get("explainers", {}))
    section.setdefault("seed", seed)
    if "enabled" in section:
        section["enabled"] = tuple(section["enabled"])
    try:
        return ExplainerConfig(**section)
    except (TypeError, ParameterError) as exc:
        raise ConfigError(f"bad explainer config: {exc}") from exc


def _pipeline_config(cfg: dict, seed: int, metric: str | None) -> PipelineConfig:
    metric = metric or cfg.get("selection_metric", L2)
    if metric not in SELECTION_METRICS:
        raise ConfigError(f"unknown selection metric {metric!r}; use one of {SELECTION_METRICS}")
    return PipelineConfig(
        metric=metric,
        neighbor_k=int(cfg.get("neighbor_k", DEFAULT_NEIGHBORS)),
        explainers=_explainer_config(cfg, seed),
    )


# -- commands ------------------------------------------------------------------


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    data_path = _existing_path(
        args.data or _require(cfg, "dataset", "--data"), "data file"
    )
    schema_path = _existing_path(
        args.schema or _require(cfg, "schema", "--schema"), "schema file"
    )
    out_path = Path(args.out or _require(cfg, "model", "--out"))

    data = load_dataset(data_path, schema_path)
    model, report = train(data, _train_config(cfg, seed))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out_path)
    print(f"model written to {out_path}")
    print(f"train accuracy: {report.train_accuracy:.4f}")
    print(f"validation accuracy: {report.val_accuracy:.4f}")
    return EXIT_OK


def _format_ideal(raw) -> str:
    return "(" + ", ".join(f"{v:g}" for v in raw) + ")"


def _print_result(result: SelectionResult, query: Instance, schema) -> None:
    c = result.counts
    print(f"candidates: {c.all}")
    print(f"valid: {c.valid}")
    print(f"valid+actionable: {c.actionable}")
    print(f"pareto front: {c.front}")
    if result.ideal is not None:
        print(f"ideal point (raw): {_format_ideal(result.ideal.raw)}")
    if result.chosen is None:
        print("no counterfactual found (coverage miss)")
        return
    chosen = result.chosen
    print(
        f"selected ({result.distance_metric}): explainer={chosen.explainer_id} "
        f"restart={chosen.restart}"
    )
    if result.chosen_criteria is not None:
        p, f, d = result.chosen_criteria
        print(f"selected criteria: proximity={p:g} feasibility={f:g} dpow={d:g}")
    print("feature diff vs query:")
    any_diff = False
    for i, spec in enumerate(schema.features):
        a, b = query.values[i], chosen.values[i]
        if spec.kind == "continuous":
            if abs(float(a) - float(b)) <= 1e-9:
                continue
        elif a == b:
            continue
        any_diff = True
        print(f"  {spec.name}: {a} -> {b}")
    if not any_diff:
        print("  (none)")


def cmd_explain(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))

    if args.fixture:
        dump = load_candidates(_existing_path(args.fixture, "fixture file"))
        metric = args.metric or cfg.get("selection_metric", L2)
        result = replay(dump, metric)
        print(f"query predicted: {dump.query_predicted}  desired: {dump.desired_class}")
        _print_result(result, dump.query, dump.schema)
        return EXIT_OK

    data_path = _existing_path(
        args.data or _require(cfg, "dataset", "--data"), "data file"
    )
    schema_path = _existing_path(
        args.schema or _require(cfg, "schema", "--schema"), "schema file"
    )
    model_path = _existing_path(
        args.model or _require(cfg, "model", "--model"), "model file"
    )
    data = load_dataset(data_path, schema_path)
    model = load_model(model_path)
    pipe_cfg = _pipeline_config(cfg, seed, args.metric)

    if args.instance_id is not None:
        if not 0 <= args.instance_id < len(data.rows):
            raise ConfigError(f"instance id {args.instance_id} out of range")
        query = data.rows[args.instance_id]
    elif args.values is not None:
        tokens = [t.strip() for t in args.values.split(",")]
        if len(tokens) != len(data.schema):
            raise ConfigError(
                f"expected {len(data.schema)} values, got {len(tokens)}"
            )
        parsed = [
            float(t) if f.kind == "continuous" else t
            for t, f in zip(tokens, data.schema.features)
        ]
        query = Instance(values=tuple(parsed))
    else:
        raise ConfigError("one of --instance-id, --values, --fixture is required")

    desired = args.desired_class
    predicted = model.predict(query)
    if desired is not None and predicted == desired:
        raise ConfigError(
            f"instance already predicted as the desired class {desired!r}; "
            "nothing to explain"
        )
    desired = desired_class_for(model, query, desired)
    print(f"query predicted: {predicted}  desired: {desired}")
    result = explain(query, data, model, pipe_cfg, desired_class=desired)
    _print_result(result, query, data.schema)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(result.to_json() + "\n", encoding="utf-8")
        print(f"result written to {args.out}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    data_path = _existing_path(
        args.data or _require(cfg, "dataset", "--data"), "data file"
    )
    schema_path = _existing_path(
        args.schema or _require(cfg, "schema", "--schema"), "schema file"
    )
    model_path = _existing_path(
        args.model or _require(cfg, "model", "--model"), "model file"
    )
    out_dir = Path(args.out or cfg.get("out_dir", "out"))
    n_instances = args.instances or int(cfg.get("test_instances", 30))
    workers = int(cfg.get("workers", 1))

    data = load_dataset(data_path, schema_path)
    model = load_model(model_path)
    pipe_cfg = _pipeline_config(cfg, seed, args.metric)

    hashes = {
        "dataset": evaluation.file_hash(data_path),
        "schema": evaluation.file_hash(schema_path),
        "model": evaluation.file_hash(model_path),
    }
    if cfg.get("_config_path"):
        hashes["config"] = evaluation.file_hash(cfg["_config_path"])

    artifacts = evaluation.evaluate_dataset(
        data, model, pipe_cfg, n_instances, seed=seed,
        dataset_name=str(cfg.get("name", data_path.stem)),
        workers=workers, config_hashes=hashes,
    )
    paths = evaluation.emit_reports(artifacts, out_dir)
    for kind, p in paths.items():
        print(f"{kind}: {p}")
    best = min(artifacts.ranks, key=artifacts.ranks.get)
    print(f"best average rank: {best} ({artifacts.ranks[best]:.3g})")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args.config)
    out_dir = Path(args.out or cfg.get("out_dir", "out"))
    name = str(cfg.get("name", args.dataset_name or "dataset"))
    criteria_path = out_dir / f"selected_criteria_{name}.json"
    if args.criteria:
        criteria_path = Path(args.criteria)
    if not criteria_path.exists():
        raise ConfigError(
            f"evaluation output not found: {criteria_path}; run `evaluate` first"
        )
    step = args.step or str(cfg.get("sweep_step", "1/16"))
    try:
        frac = Fraction(step)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad step {step!r}: {exc}") from exc

    selected = evaluation.load_selected_criteria(criteria_path)
    result = evaluation.sweep(selected, frac)
    path = evaluation.write_sweep_csv(result, out_dir / f"sweep_{name}.csv")
    print(f"sweep: {path} ({len(result.rows)} rows)")
    return EXIT_OK


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfselect",
        description="Ensemble counterfactual generation with multi-criteria selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="YAML run config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output path (command specific)")

    p_train = sub.add_parser("train", help="train and save the black-box model")
    common(p_train)
    p_train.add_argument("--data", help="dataset CSV")
    p_train.add_argument("--schema", help="schema YAML")
    p_train.set_defaults(func=cmd_train)

    p_explain = sub.add_parser("explain", help="explain one instance end to end")
    common(p_explain)
    p_explain.add_argument("--data", help="dataset CSV")
    p_explain.add_argument("--schema", help="schema YAML")
    p_explain.add_argument("--model", help="model file")
    p_explain.add_argument("--metric", choices=SELECTION_METRICS)
    p_explain.add_argument("--instance-id", type=int, help="row id to explain")
    p_explain.add_argument("--values", help="comma-separated feature values")
    p_explain.add_argument("--fixture", help="candidate JSONL replacing live generation")
    p_explain.add_argument("--desired-class", help="target class label")
    p_explain.set_defaults(func=cmd_explain)

    p_eval = sub.add_parser("evaluate", help="run all method variants on the test split")
    common(p_eval)
    p_eval.add_argument("--data", help="dataset CSV")
    p_eval.add_argument("--schema", help="schema YAML")
    p_eval.add_argument("--model", help="model file")
    p_eval.add_argument("--metric", choices=SELECTION_METRICS)
    p_eval.add_argument("--instances", type=int, help="number of test instances")
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="utility sweep over the weight simplex")
    common(p_sweep)
    p_sweep.add_argument("--step", help="grid step as a fraction, e.g. 1/16")
    p_sweep.add_argument("--criteria", help="selected-criteria JSON from evaluate")
    p_sweep.add_argument("--dataset-name", help="dataset name used in file names")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, LoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CfselectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # pragma: no cover - safety net
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
