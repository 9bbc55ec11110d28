"""End-to-end per-instance pipeline and the recorded-walkthrough replay."""

from __future__ import annotations

import numpy as np
import pytest

from cfselect.data import Instance
from cfselect.errors import ParameterError
from cfselect.explainers import Candidate, ExplainerConfig, load_candidates
from cfselect.mcda import SELECTION_DIRECTIONS, dominates
from cfselect.pipeline import PipelineConfig, desired_class_for, explain, replay

from conftest import TOY_FIXTURE, StubModel


@pytest.fixture(scope="module")
def german_result(german_data, german_model):
    cfg = PipelineConfig(
        metric="L2",
        explainers=ExplainerConfig(
            seed=11, nun_k=5, gs_restarts=5, gs_samples_per_shell=40,
            wachter_k=5, wachter_steps=200, dice_restarts=5, dice_steps=120,
            cadex_caps=6,
        ),
    )
    x = german_data.test_rows[0]
    return x, explain(x, german_data, german_model, cfg)


class TestExplain:
    def test_counts_monotone(self, german_result):
        _, result = german_result
        c = result.counts
        assert c.all >= c.valid >= c.actionable >= c.front >= c.chosen

    def test_chosen_is_valid_and_actionable(self, german_data, german_model, german_result):
        x, result = german_result
        chosen = result.chosen
        assert chosen is not None
        desired = desired_class_for(german_model, x)
        assert german_model.predict(Instance(values=chosen.values)) == desired
        for i in german_data.schema.immutable_indices:
            assert chosen.values[i] == x.values[i]

    def test_chosen_not_dominated_by_any_survivor(self, german_result):
        _, result = german_result
        chosen_vec = result.chosen_criteria
        for row in result.survivor_criteria:
            assert not dominates(row, chosen_vec, SELECTION_DIRECTIONS)

    def test_chosen_on_front(self, german_result):
        _, result = german_result
        assert any(c is result.chosen for c, _ in result.front.members)

    def test_normalized_ideal_at_origin(self, german_result):
        _, result = german_result
        np.testing.assert_allclose(result.ideal.normalized, np.zeros(3), atol=1e-12)

    def test_flags_annotated(self, german_result):
        _, result = german_result
        assert all(c.valid is not None and c.actionable is not None
                   for c in result.candidates)

    def test_valid_flag_matches_recomputed_prediction(
        self, german_data, german_model, german_result
    ):
        x, result = german_result
        desired = desired_class_for(german_model, x)
        for c in result.candidates:
            recomputed = german_model.predict(Instance(values=c.values))
            assert c.valid == (recomputed == desired)

    def test_json_serialization(self, german_result):
        import json

        _, result = german_result
        payload = json.loads(result.to_json())
        assert payload["counts"]["all"] == result.counts.all
        assert len(payload["front_criteria"]) == len(result.front)
        assert payload["chosen"]["explainer"] == result.chosen.explainer_id

    def test_coverage_miss_when_model_degenerate(self, german_data, german_model):
        stub = StubModel(lambda x: "good", classes=("bad", "good"))
        stub.class_index = lambda label: ("bad", "good").index(label)
        cfg = PipelineConfig(
            metric="L2", explainers=ExplainerConfig(seed=0, enabled=("nun",), nun_k=1)
        )
        x = german_data.test_rows[0]
        result = explain(x, german_data, stub, cfg, desired_class="bad")
        assert result.chosen is None
        assert result.counts.chosen == 0

    def test_desired_class_override_validated(self, german_data, german_model):
        with pytest.raises(ParameterError):
            desired_class_for(german_model, german_data.test_rows[0], "nope")

    @pytest.mark.parametrize("metric", ["L1", "L2", "Linf", "nadir_plane"])
    def test_all_metrics_produce_front_member(self, german_data, german_model, metric):
        cfg = PipelineConfig(
            metric=metric,
            explainers=ExplainerConfig(seed=11, enabled=("nun", "cadex"), nun_k=5, cadex_caps=4),
        )
        x = german_data.test_rows[3]
        result = explain(x, german_data, german_model, cfg)
        if result.chosen is not None:
            assert any(c is result.chosen for c, _ in result.front.members)


class TestReplay:
    def test_walkthrough_counts(self):
        dump = load_candidates(TOY_FIXTURE)
        result = replay(dump, metric="L2")
        assert result.counts.as_tuple() == (82, 77, 59, 13, 1)

    def test_walkthrough_ideal_point(self):
        dump = load_candidates(TOY_FIXTURE)
        result = replay(dump, metric="L2")
        np.testing.assert_allclose(result.ideal.raw, [0.04, 0.11, 1.0])

    def test_walkthrough_selection_changes_only_capital_gain(self):
        dump = load_candidates(TOY_FIXTURE)
        result = replay(dump, metric="L2")
        x = dump.query
        names = [f.name for f in dump.schema.features]
        diffs = [
            names[i] for i in range(len(names))
            if result.chosen.values[i] != x.values[i]
        ]
        assert diffs == ["capital.gain"]
        assert result.chosen.values[names.index("capital.gain")] == 17327.0

    def test_walkthrough_selected_scores_stored_verbatim(self):
        dump = load_candidates(TOY_FIXTURE)
        result = replay(dump, metric="L2")
        np.testing.assert_allclose(result.chosen_criteria, [0.173, 0.962, 0.11])

    def test_replay_needs_query_record(self, tmp_path):
        from cfselect.explainers import CandidateDump

        dump = CandidateDump(candidates=(Candidate(values=(1.0,), explainer_id="e", restart=0),))
        with pytest.raises(ParameterError):
            replay(dump)

    def test_replay_requires_stored_criteria(self, tmp_path):
        dump = load_candidates(TOY_FIXTURE)
        stripped = dump.__class__(
            candidates=tuple(
                c.__class__(values=c.values, explainer_id=c.explainer_id,
                            restart=c.restart, predicted=c.predicted)
                for c in dump.candidates
            ),
            query=dump.query,
            query_predicted=dump.query_predicted,
            desired_class=dump.desired_class,
            schema=dump.schema,
        )
        with pytest.raises(ParameterError, match="criteria"):
            replay(stripped)
