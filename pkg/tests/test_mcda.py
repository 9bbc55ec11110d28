"""Dominance, Pareto front, normalization and the selection rules."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfselect.data import CATEGORICAL, CONTINUOUS, FeatureSchema, FeatureSpec, Instance
from cfselect.errors import ParameterError
from cfselect.explainers import Candidate
from cfselect.mcda import (
    L1,
    L2,
    LINF,
    CriteriaBounds,
    Direction,
    dominates,
    filter_actionable,
    filter_valid,
    normalize_criteria,
    pareto_front,
    select_ideal,
    select_nadir_plane,
)

MIN, MAX = Direction.MIN, Direction.MAX
MMM = (MIN, MIN, MAX)


def cand(i: int, explainer="e", restart=None, predicted="t", values=None) -> Candidate:
    return Candidate(
        values=values if values is not None else (float(i),),
        explainer_id=explainer,
        restart=i if restart is None else restart,
        predicted=predicted,
    )


def scored(vectors) -> list[tuple[Candidate, tuple]]:
    return [(cand(i), tuple(v)) for i, v in enumerate(vectors)]


class TestDominates:
    def test_better_on_all(self):
        assert dominates((0.1, 0.2, 0.9), (0.2, 0.3, 0.5), MMM)

    def test_incomparable_both_ways(self):
        a, b = (0.1, 0.5, 0.9), (0.2, 0.3, 0.5)
        assert not dominates(a, b, MMM)
        assert not dominates(b, a, MMM)

    def test_equal_vectors_do_not_dominate(self):
        a = (0.1, 0.2, 0.3)
        assert not dominates(a, a, MMM)

    def test_arity_mismatch(self):
        with pytest.raises(ParameterError):
            dominates((1.0, 2.0), (1.0, 2.0, 3.0), MMM)


def brute_force_front(vectors, dirs):
    """Textbook double loop used as the oracle."""
    keep = []
    for i, a in enumerate(vectors):
        if not any(
            dominates(b, a, dirs) for j, b in enumerate(vectors) if j != i
        ):
            keep.append(i)
    return set(keep)


class TestParetoFront:
    def test_single_candidate(self):
        front = pareto_front(scored([(1.0, 1.0, 0.5)]), MMM)
        assert len(front) == 1 and front.dominated_count == 0

    def test_empty_input(self):
        front = pareto_front([], MMM)
        assert len(front) == 0

    def test_duplicates_both_kept(self):
        front = pareto_front(scored([(1.0, 2.0, 0.5), (1.0, 2.0, 0.5)]), MMM)
        assert len(front) == 2

    def test_matches_brute_force_small_random(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            n = int(rng.integers(1, 30))
            vectors = [tuple(rng.uniform(0, 1, size=3)) for _ in range(n)]
            dirs = tuple(MIN if rng.random() < 0.5 else MAX for _ in range(3))
            front = pareto_front(scored(vectors), dirs)
            got = {f.restart for f, _ in front.members}
            assert got == brute_force_front(vectors, dirs)
            assert front.dominated_count == n - len(got)

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        vectors = [tuple(rng.uniform(0, 1, size=3)) for _ in range(50)]
        once = pareto_front(scored(vectors), MMM)
        again = pareto_front(
            [(c, tuple(v)) for c, v in once.members], MMM
        )
        assert len(again) == len(once) and again.dominated_count == 0


class TestNormalizeCriteria:
    def test_min_max_definition(self):
        matrix = np.array([[2.0], [4.0], [6.0]])
        norm, _ = normalize_criteria(matrix, (MIN,))
        np.testing.assert_allclose(norm[:, 0], [0.0, 0.5, 1.0])

    def test_max_criterion_inverted(self):
        matrix = np.array([[0.2], [1.0]])
        norm, _ = normalize_criteria(matrix, (MAX,))
        np.testing.assert_allclose(norm[:, 0], [1.0, 0.0])

    def test_zero_spread_maps_to_zero(self):
        matrix = np.array([[3.0], [3.0], [3.0]])
        for d in (MIN, MAX):
            norm, _ = normalize_criteria(matrix, (d,))
            np.testing.assert_array_equal(norm[:, 0], [0.0, 0.0, 0.0])


def unit_bounds(dim=3):
    return CriteriaBounds(
        lo=np.zeros(dim), hi=np.ones(dim), dirs=tuple([MIN] * dim)
    )


class TestSelectIdeal:
    def test_hand_evaluated_l1(self):
        # distances to (0,0,0): 0.7, 0.4, 0.2 -> third wins
        front = pareto_front(
            scored([(0.0, 0.5, 0.2), (0.3, 0.0, 0.1), (0.1, 0.1, 0.0)]),
            (MIN, MIN, MIN),
        )
        assert len(front) == 3
        result = select_ideal(front, L1, unit_bounds(), (MIN, MIN, MIN))
        assert result.chosen.restart == 2
        np.testing.assert_allclose(result.ideal.normalized, [0.0, 0.0, 0.0])

    def test_front_of_one_for_every_metric(self):
        front = pareto_front(scored([(0.5, 0.5, 0.5)]), MMM)
        for metric in (L1, L2, LINF):
            result = select_ideal(front, metric)
            assert result.chosen.restart == 0

    def test_empty_front_is_coverage_miss(self):
        front = pareto_front([], MMM)
        result = select_ideal(front, L2)
        assert result.chosen is None
        assert result.counts.chosen == 0

    def test_ideal_raw_directions(self):
        front = pareto_front(
            scored([(1.0, 5.0, 0.2), (2.0, 3.0, 0.9), (3.0, 4.0, 0.5)]), MMM
        )
        result = select_ideal(front, L2)
        np.testing.assert_allclose(result.ideal.raw, [1.0, 3.0, 0.9])

    def test_tie_breaks_by_provenance_order(self):
        vectors = [(0.5, 0.5, 0.5), (0.5, 0.5, 0.5)]
        front = pareto_front(scored(vectors), (MIN, MIN, MIN))
        result = select_ideal(front, L2, unit_bounds(), (MIN, MIN, MIN))
        assert result.chosen.restart == 0

    @given(st.lists(
        st.tuples(st.floats(0, 10), st.floats(0, 10), st.floats(0, 1)),
        min_size=1, max_size=40,
    ))
    @settings(max_examples=100, deadline=None)
    def test_normalized_ideal_is_origin(self, vectors):
        # per-criterion optima always survive to the front, so the ideal
        # point in normalized oriented space sits at the origin
        matrix = np.array(vectors)
        _, bounds = normalize_criteria(matrix, MMM)
        front = pareto_front(scored(vectors), MMM)
        result = select_ideal(front, L2, bounds, MMM)
        np.testing.assert_allclose(result.ideal.normalized, np.zeros(3), atol=1e-12)

    @given(st.lists(
        st.tuples(st.floats(0, 10), st.floats(0, 10), st.floats(0, 1)),
        min_size=1, max_size=40,
    ))
    @settings(max_examples=100, deadline=None)
    def test_l1_equivalent_to_unweighted_sum(self, vectors):
        matrix = np.array(vectors)
        oriented, bounds = normalize_criteria(matrix, MMM)
        front = pareto_front(scored(vectors), MMM)
        front_oriented = bounds.apply(front.criteria_matrix())
        l1_dists = np.abs(front_oriented).sum(axis=1)
        sums = front_oriented.sum(axis=1)
        assert set(np.flatnonzero(l1_dists == l1_dists.min())) == set(
            np.flatnonzero(sums == sums.min())
        )


class TestSelectNadirPlane:
    def test_two_point_geometry(self):
        # nearer the ideal along the ideal-nadir axis wins
        front = pareto_front(
            scored([(0.2, 0.8, 0.8), (0.8, 0.2, 0.3)]), (MIN, MIN, MIN)
        )
        assert len(front) == 2
        result = select_nadir_plane(front, unit_bounds(), (MIN, MIN, MIN))
        # projections onto the normalized axis: candidate 1 has the larger
        # distance from the ideal along (nadir - ideal); verify with plain
        # 2-point geometry
        m = np.array([[0.2, 0.8, 0.8], [0.8, 0.2, 0.3]])
        ideal = m.min(axis=0)
        nadir = m.max(axis=0)
        axis = (nadir - ideal) / np.linalg.norm(nadir - ideal)
        proj = (m - ideal) @ axis
        assert result.chosen.restart == int(np.argmin(proj))

    def test_degenerate_front_falls_back(self):
        vectors = [(0.5, 0.5, 0.5), (0.5, 0.5, 0.5)]
        front = pareto_front(scored(vectors), (MIN, MIN, MIN))
        result = select_nadir_plane(front, unit_bounds(), (MIN, MIN, MIN))
        assert result.chosen.restart == 0
        assert result.distance_metric == "nadir_plane"

    def test_symmetric_tie_resolved_by_order(self):
        # two members mirrored about the axis project identically
        front = pareto_front(
            scored([(0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (0.6, 0.4, 0.5), (0.4, 0.6, 0.5)]),
            (MIN, MIN, MIN),
        )
        result = select_nadir_plane(front, unit_bounds(), (MIN, MIN, MIN))
        assert result.chosen.restart == 0  # the ideal member itself projects at 0


def two_feature_schema():
    return FeatureSchema(features=(
        FeatureSpec("v", CONTINUOUS, range=(0.0, 1.0)),
        FeatureSpec("c", CATEGORICAL, categories=("a", "b"), immutable=True),
    ))


class TestFilters:
    def test_filter_valid_keeps_matching(self):
        cands = [cand(0, predicted="t"), cand(1, predicted="o"), cand(2, predicted="t")]
        out = filter_valid(cands, None, "t")
        assert [c.restart for c in out] == [0, 2]

    def test_filter_valid_all_invalid(self):
        assert filter_valid([cand(0, predicted="o")], None, "t") == []

    def test_filter_actionable_drops_immutable_changes(self):
        schema = two_feature_schema()
        x = Instance(values=(0.5, "a"))
        cands = [
            cand(0, values=(0.7, "a")),
            cand(1, values=(0.5, "b")),  # flips the immutable categorical
        ]
        out = filter_actionable(cands, x, schema)
        assert [c.restart for c in out] == [0]

    def test_filter_actionable_without_immutables_is_identity(self):
        schema = FeatureSchema(features=(
            FeatureSpec("v", CONTINUOUS, range=(0.0, 1.0)),
        ))
        x = Instance(values=(0.5,))
        cands = [cand(0, values=(0.9,)), cand(1, values=(0.1,))]
        assert filter_actionable(cands, x, schema) == cands
