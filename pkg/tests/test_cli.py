"""Command-line surface: exit codes, outputs, determinism."""

from __future__ import annotations

import csv
import textwrap
from pathlib import Path

import pytest

from cfselect.cli import EXIT_CONFIG, EXIT_OK, main

from conftest import DATA_DIR, TOY_FIXTURE

GERMAN_CSV = DATA_DIR / "german_credit.csv"
GERMAN_SCHEMA = DATA_DIR / "german_schema.yaml"


def write_config(tmp_path: Path, **overrides) -> Path:
    model = overrides.get("model", tmp_path / "model.bin")
    out_dir = overrides.get("out_dir", tmp_path / "out")
    text = textwrap.dedent(f"""
        name: german
        dataset: {GERMAN_CSV}
        schema: {GERMAN_SCHEMA}
        model: {model}
        out_dir: {out_dir}
        seed: 5
        neighbor_k: 5
        selection_metric: L2
        test_instances: {overrides.get("test_instances", 2)}
        sweep_step: 1/16
        train:
          hidden: [32, 16]
          epochs: 25
          learning_rate: 0.1
          batch_size: 32
          dropout: 0.1
        explainers:
          nun_k: 3
          gs_restarts: 2
          gs_samples_per_shell: 30
          gs_refine_steps: 2
          wachter_k: 3
          wachter_steps: 120
          dice_restarts: 3
          dice_steps: 80
          cadex_caps: 4
    """).lstrip()
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    config = write_config(tmp)
    assert main(["train", "--config", str(config)]) == EXIT_OK
    return tmp, config


class TestTrainCommand:
    def test_creates_model_file(self, trained, capsys):
        tmp, _ = trained
        assert (tmp / "model.bin").exists()

    def test_missing_data_path_names_it(self, tmp_path, capsys):
        code = main([
            "train", "--data", str(tmp_path / "nope.csv"),
            "--schema", str(GERMAN_SCHEMA), "--out", str(tmp_path / "m.bin"),
        ])
        captured = capsys.readouterr()
        assert code == EXIT_CONFIG
        assert "nope.csv" in captured.err

    def test_same_seed_byte_identical_models(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "m1.bin", tmp_path / "m2.bin"
        assert main(["train", "--config", str(cfg), "--out", str(out1)]) == EXIT_OK
        assert main(["train", "--config", str(cfg), "--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()


class TestExplainCommand:
    def test_fixture_replay_prints_trace(self, capsys):
        code = main(["explain", "--fixture", str(TOY_FIXTURE), "--metric", "L2"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        for line in [
            "query predicted: >50K  desired: <=50K",
            "candidates: 82",
            "valid: 77",
            "valid+actionable: 59",
            "pareto front: 13",
            "ideal point (raw): (0.04, 0.11, 1)",
            "capital.gain: 0.0 -> 17327.0",
        ]:
            assert line in out

    def test_live_instance(self, trained, capsys):
        tmp, config = trained
        code = main(["explain", "--config", str(config), "--instance-id", "3"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "pareto front:" in out

    def test_already_desired_class_rejected(self, trained, capsys):
        tmp, config = trained
        # find the model's prediction for row 3, then ask for that same class
        from cfselect.blackbox import load_model
        from cfselect.data import load_dataset

        data = load_dataset(GERMAN_CSV, GERMAN_SCHEMA)
        model = load_model(tmp / "model.bin")
        predicted = model.predict(data.rows[3])
        code = main([
            "explain", "--config", str(config), "--instance-id", "3",
            "--desired-class", predicted,
        ])
        err = capsys.readouterr().err
        assert code == EXIT_CONFIG
        assert "nothing to explain" in err

    def test_inline_values(self, trained, capsys):
        tmp, config = trained
        from cfselect.data import load_dataset

        data = load_dataset(GERMAN_CSV, GERMAN_SCHEMA)
        tokens = ",".join(str(v) for v in data.rows[0].values)
        code = main(["explain", "--config", str(config), "--values", tokens])
        assert code == EXIT_OK

    def test_needs_some_instance_selector(self, trained, capsys):
        tmp, config = trained
        code = main(["explain", "--config", str(config)])
        assert code == EXIT_CONFIG


class TestEvaluateAndSweep:
    def test_evaluate_writes_reports(self, trained, capsys):
        tmp, config = trained
        code = main(["evaluate", "--config", str(config)])
        assert code == EXIT_OK
        metrics = tmp / "out" / "metrics_german.csv"
        with open(metrics, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 9

        survival = tmp / "out" / "survival_german.csv"
        with open(survival, newline="") as fh:
            for row in csv.DictReader(fh):
                assert float(row["all"]) >= float(row["val"]) >= float(row["act"])
                assert float(row["front"]) <= float(row["act"])

    def test_sweep_default_step(self, trained, capsys):
        tmp, config = trained
        code = main(["sweep", "--config", str(config)])
        assert code == EXIT_OK
        with open(tmp / "out" / "sweep_german.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 153

    def test_sweep_step_one(self, trained, capsys):
        tmp, config = trained
        code = main(["sweep", "--config", str(config), "--step", "1"])
        assert code == EXIT_OK
        with open(tmp / "out" / "sweep_german.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3

    def test_sweep_corner_winners_match_metrics_best(self, trained):
        tmp, config = trained
        main(["evaluate", "--config", str(config)])
        main(["sweep", "--config", str(config), "--step", "1"])
        with open(tmp / "out" / "metrics_german.csv", newline="") as fh:
            metrics = list(csv.DictReader(fh))
        with open(tmp / "out" / "sweep_german.csv", newline="") as fh:
            corners = {
                (r["w_p"], r["w_d"], r["w_f"]): r["winner"]
                for r in csv.DictReader(fh)
            }
        covered = [r for r in metrics if float(r["cover"]) > 0]

        def best(col, reverse):
            target = max if reverse else min
            value = target(float(r[col]) for r in covered)
            return {r["method"] for r in covered if float(r[col]) == value}

        assert corners[("1", "0", "0")] in best("prox", reverse=False)
        assert corners[("0", "1", "0")] in best("dpow", reverse=True)
        assert corners[("0", "0", "1")] in best("feas", reverse=False)

    def test_sweep_before_evaluate_fails(self, tmp_path, capsys):
        config = write_config(tmp_path)
        code = main(["sweep", "--config", str(config)])
        assert code == EXIT_CONFIG
        assert "run `evaluate` first" in capsys.readouterr().err

    def test_repeated_evaluate_bit_identical_csvs(self, trained, tmp_path):
        tmp, config = trained
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        for out in (out1, out2):
            assert main(["evaluate", "--config", str(config), "--out", str(out)]) == EXIT_OK
        for name in ("metrics_german.csv", "survival_german.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
