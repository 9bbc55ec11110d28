"""Replay a recorded candidate dump through the selection pipeline.

The bundled fixture holds 82 counterfactual candidates generated for one
census-style query (income >50K, desired <=50K), together with their stored
predictions and criteria scores. Replaying it walks the four pipeline
stages without needing a dataset or model:

    82 candidates -> 77 valid -> 59 actionable -> 13 on the front -> 1 chosen

Run from the repo root:  python3 demos/01_walkthrough_replay.py
"""

from pathlib import Path

from cfselect.explainers import load_candidates
from cfselect.pipeline import replay

FIXTURE = Path(__file__).resolve().parent.parent / "data" / "toy_adult_fixture.jsonl"


def main() -> None:
    dump = load_candidates(FIXTURE)
    print(f"query predicted {dump.query_predicted}, desired {dump.desired_class}")

    result = replay(dump, metric="L2")
    c = result.counts
    print(f"stage 1 (ensemble output):        {c.all} candidates")
    print(f"stage 2 (validity filter):        {c.valid} remain")
    print(f"stage 2 (actionability filter):   {c.actionable} remain")
    print(f"stage 3 (dominance filter):       {c.front} on the Pareto front")
    print(f"stage 4 (ideal-point selection):  {c.chosen} chosen")

    ideal = ", ".join(f"{v:g}" for v in result.ideal.raw)
    print(f"\nideal point (proximity, feasibility, dpow) = ({ideal})")

    p, f, d = result.chosen_criteria
    print(f"selected candidate scores: proximity={p:g} feasibility={f:g} dpow={d:g}")

    print("\nrecommended change versus the query:")
    names = [spec.name for spec in dump.schema.features]
    for i, name in enumerate(names):
        if result.chosen.values[i] != dump.query.values[i]:
            print(f"  {name}: {dump.query.values[i]} -> {result.chosen.values[i]}")

    # the same front under the other distances
    for metric in ("L1", "Linf", "nadir_plane"):
        alt = replay(dump, metric=metric)
        q, r, s = alt.chosen_criteria
        print(f"\nunder {metric}: criteria ({q:g}, {r:g}, {s:g}) "
              f"from {alt.chosen.explainer_id}")


if __name__ == "__main__":
    main()
