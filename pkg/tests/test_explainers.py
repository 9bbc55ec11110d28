"""Base explainer contracts: oracle checks, determinism, budgets, dumps."""

from __future__ import annotations

import numpy as np
import pytest

from cfselect.data import Instance, heom_distance
from cfselect.errors import ParameterError
from cfselect.explainers import (
    EXPLAINER_ORDER,
    Candidate,
    ExplainerConfig,
    dump_candidates,
    generate,
    growing_spheres,
    load_candidates,
    run_ensemble,
)
from cfselect.metrics import sparsity

from conftest import StubModel


@pytest.fixture(scope="module")
def toy_model(toy2d):
    from cfselect.blackbox import TrainConfig, train

    model, report = train(toy2d, TrainConfig(hidden=(16, 16), epochs=60, seed=3, dropout=0.0))
    assert report.val_accuracy >= 0.95
    return model


def desired_of(model, x):
    return [c for c in model.classes if c != model.predict(x)][0]


class TestNun:
    def test_matches_brute_force_scan(self, toy2d, toy_model, fast_cfg):
        x = toy2d.test_rows[0]
        desired = desired_of(toy_model, x)
        cands = generate("nun", x, toy2d, toy_model, fast_cfg)
        preds = toy_model.predict_batch(list(toy2d.train_rows))
        eligible = sorted(
            (heom_distance(x, r, toy2d.schema, toy2d.ranges), r.id)
            for r, p in zip(toy2d.train_rows, preds)
            if p == desired
        )
        got = [
            (heom_distance(x, Instance(values=c.values), toy2d.schema, toy2d.ranges))
            for c in cands
        ]
        assert len(cands) == fast_cfg.nun_k
        assert got == [d for d, _ in eligible[: fast_cfg.nun_k]]

    def test_all_candidates_valid(self, toy2d, toy_model, fast_cfg):
        x = toy2d.test_rows[0]
        desired = desired_of(toy_model, x)
        for c in generate("nun", x, toy2d, toy_model, fast_cfg):
            assert c.predicted == desired

    def test_empty_when_no_unlike_rows(self, toy2d, fast_cfg):
        one_class = StubModel(lambda x: "pos", classes=("neg", "pos"))
        x = toy2d.test_rows[0]
        # mimic the Model interface needed by nun
        one_class.class_index = lambda label: ("neg", "pos").index(label)
        got = generate("nun", x, toy2d, one_class, ExplainerConfig(seed=0))
        assert got == []


class TestGrowingSpheres:
    def test_finds_valid_candidate_on_separable_data(self, toy2d, toy_model, fast_cfg):
        x = toy2d.test_rows[0]
        desired = desired_of(toy_model, x)
        # oracle: a dense grid confirms the desired-class region is reachable
        grid = [
            Instance(values=(a, b))
            for a in np.linspace(0, 1, 25)
            for b in np.linspace(0, 1, 25)
        ]
        assert any(p == desired for p in toy_model.predict_batch(grid))
        cands = generate("growing_spheres", x, toy2d, toy_model, fast_cfg)
        assert any(c.predicted == desired for c in cands)

    def test_monotone_improvement_within_restart(self, toy2d, toy_model, fast_cfg):
        x = toy2d.test_rows[1]
        desired = desired_of(toy_model, x)
        trace: dict[int, list[float]] = {}
        growing_spheres(x, toy2d, toy_model, fast_cfg, desired, trace=trace)
        assert trace  # at least one restart hit
        for dists in trace.values():
            assert all(b < a for a, b in zip(dists, dists[1:]))


class TestCadex:
    def test_sparsity_bounded_by_cap(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[0]
        cands = generate("cadex", x, german_data, german_model, fast_cfg)
        assert cands
        for c in cands:
            # restart index r is the state after editing r+1 features
            changed = sparsity(x, Instance(values=c.values), german_data)
            assert changed <= c.restart + 1 <= fast_cfg.cadex_caps

    def test_immutable_features_untouched(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[0]
        imm = german_data.schema.immutable_indices
        for c in generate("cadex", x, german_data, german_model, fast_cfg):
            for i in imm:
                assert c.values[i] == x.values[i]


class TestGradientExplainers:
    @pytest.mark.parametrize("explainer", ["wachter", "dice"])
    def test_immutables_held(self, explainer, german_data, german_model, fast_cfg):
        x = german_data.test_rows[2]
        imm = german_data.schema.immutable_indices
        cands = generate(explainer, x, german_data, german_model, fast_cfg)
        assert cands
        for c in cands:
            for i in imm:
                assert c.values[i] == x.values[i]

    def test_wachter_harvests_multiple(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[2]
        cands = generate("wachter", x, german_data, german_model, fast_cfg)
        assert 1 <= len(cands) <= fast_cfg.wachter_k

    def test_dice_one_candidate_per_restart(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[2]
        cands = generate("dice", x, german_data, german_model, fast_cfg)
        assert len(cands) == fast_cfg.dice_restarts
        assert [c.restart for c in cands] == list(range(fast_cfg.dice_restarts))


class TestEnsemble:
    def test_single_explainer_single_candidate(self, toy2d, toy_model):
        cfg = ExplainerConfig(seed=0, enabled=("nun",), nun_k=1)
        cands = run_ensemble(toy2d.test_rows[0], toy2d, toy_model, cfg)
        assert len(cands) == 1
        assert cands[0].explainer_id == "nun"

    def test_budget_upper_bound(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[1]
        cands = run_ensemble(x, german_data, german_model, fast_cfg)
        budget = (
            fast_cfg.nun_k + fast_cfg.gs_restarts + fast_cfg.wachter_k
            + fast_cfg.cadex_caps + fast_cfg.dice_restarts
        )
        assert 1 <= len(cands) <= budget

    def test_deterministic_given_seed(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[1]
        a = run_ensemble(x, german_data, german_model, fast_cfg)
        b = run_ensemble(x, german_data, german_model, fast_cfg)
        assert [(c.values, c.explainer_id, c.restart) for c in a] == [
            (c.values, c.explainer_id, c.restart) for c in b
        ]

    def test_provenance_order(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[1]
        cands = run_ensemble(x, german_data, german_model, fast_cfg)
        order = [EXPLAINER_ORDER.index(c.explainer_id) for c in cands]
        assert order == sorted(order)

    def test_no_exact_duplicates(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[1]
        cands = run_ensemble(x, german_data, german_model, fast_cfg)
        assert len({c.values for c in cands}) == len(cands)

    def test_predictions_populated_and_correct(self, german_data, german_model, fast_cfg):
        x = german_data.test_rows[1]
        for c in run_ensemble(x, german_data, german_model, fast_cfg):
            assert c.predicted == german_model.predict(Instance(values=c.values))

    def test_unknown_explainer_rejected(self, toy2d, toy_model):
        with pytest.raises(ParameterError):
            generate("mystery", toy2d.test_rows[0], toy2d, toy_model, ExplainerConfig())
        with pytest.raises(ParameterError):
            ExplainerConfig(enabled=("mystery",))


class TestCandidateDump:
    def test_round_trip(self, tmp_path):
        cands = [
            Candidate(values=(1.0, "a"), explainer_id="nun", restart=0, predicted="t"),
            Candidate(values=(2.0, "b"), explainer_id="dice", restart=3, predicted="o",
                      criteria=(0.1, 0.2, 0.3)),
        ]
        path = tmp_path / "dump.jsonl"
        dump_candidates(path, cands)
        loaded = load_candidates(path)
        assert len(loaded.candidates) == 2
        assert loaded.candidates[0].values == (1.0, "a")
        assert loaded.candidates[1].criteria == (0.1, 0.2, 0.3)
        assert loaded.query is None

    def test_bundled_fixture_loads(self):
        from conftest import TOY_FIXTURE

        dump = load_candidates(TOY_FIXTURE)
        assert len(dump.candidates) == 82
        assert dump.query is not None
        assert dump.desired_class == "<=50K"
        assert dump.schema is not None
