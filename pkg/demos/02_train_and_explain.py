"""Train the black box and explain one credit application end to end.

Uses the bundled German-credit-style dataset: trains the two-hidden-layer
network, runs the five-explainer ensemble on one holdout instance, filters
for validity and actionability, reduces to the Pareto front, and selects a
compromise counterfactual with the ideal-point rule.

Run from the repo root:  python3 demos/02_train_and_explain.py
"""

from pathlib import Path

from cfselect.blackbox import TrainConfig, train
from cfselect.data import load_dataset
from cfselect.explainers import ExplainerConfig
from cfselect.pipeline import PipelineConfig, explain

DATA = Path(__file__).resolve().parent.parent / "data"


def main() -> None:
    data = load_dataset(DATA / "german_credit.csv", DATA / "german_schema.yaml")
    print(f"loaded {len(data.rows)} rows "
          f"({len(data.train_indices)} train / {len(data.test_indices)} holdout)")

    model, rep = train(data, TrainConfig(seed=7))
    print(f"train accuracy {rep.train_accuracy:.3f}, "
          f"validation accuracy {rep.val_accuracy:.3f}")

    x = data.test_rows[0]
    print(f"\nexplaining holdout row {x.id}: model says {model.predict(x)!r}")

    cfg = PipelineConfig(metric="L2", explainers=ExplainerConfig(seed=7))
    result = explain(x, data, model, cfg)

    c = result.counts
    print(f"candidates {c.all} -> valid {c.valid} -> actionable {c.actionable} "
          f"-> front {c.front} -> chosen {c.chosen}")
    print(f"selection came from explainer {result.chosen.explainer_id!r} "
          f"(restart {result.chosen.restart})")

    print("\nsuggested changes:")
    for i, spec in enumerate(data.schema.features):
        a, b = x.values[i], result.chosen.values[i]
        if spec.kind == "continuous":
            if abs(float(a) - float(b)) > 1e-9:
                print(f"  {spec.name}: {a:g} -> {float(b):.1f}")
        elif a != b:
            print(f"  {spec.name}: {a} -> {b}")

    p, f, d = result.chosen_criteria
    print(f"\nscores: proximity={p:.3f} feasibility={f:.3f} "
          f"discriminative power={d:.2f}")
    print("every front alternative (proximity, feasibility, dpow):")
    for _, vec in result.front.members:
        print(f"  ({vec[0]:.3f}, {vec[1]:.3f}, {vec[2]:.2f})")


if __name__ == "__main__":
    main()
