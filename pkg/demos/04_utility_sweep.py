"""Map which method a user would prefer under every weighting of the
three criteria.

Models user preference as a weighted gain over normalized proximity,
discriminative power and feasibility, sweeps the weight simplex on a
barycentric grid, and reports the winning method per weight triple. The
emitted CSV (w_p, w_d, w_f, winner) plots directly as a barycentric map.

Run from the repo root:  python3 demos/04_utility_sweep.py
"""

from collections import Counter
from fractions import Fraction
from pathlib import Path

from cfselect.blackbox import TrainConfig, train
from cfselect.data import load_dataset
from cfselect.evaluation import evaluate_dataset, sweep, write_sweep_csv
from cfselect.explainers import ExplainerConfig
from cfselect.pipeline import PipelineConfig

DATA = Path(__file__).resolve().parent.parent / "data"
OUT = Path(__file__).resolve().parent.parent / "out" / "sweep_demo.csv"


def main() -> None:
    data = load_dataset(DATA / "german_credit.csv", DATA / "german_schema.yaml")
    model, _ = train(data, TrainConfig(seed=7))
    cfg = PipelineConfig(
        metric="L2",
        explainers=ExplainerConfig(
            seed=7, nun_k=5, gs_restarts=6, gs_samples_per_shell=40,
            wachter_k=5, wachter_steps=250, dice_restarts=8, dice_steps=150,
            cadex_caps=8,
        ),
    )
    artifacts = evaluate_dataset(
        data, model, cfg, n_instances=8, seed=7, dataset_name="german-demo"
    )

    result = sweep(artifacts.selected_criteria, Fraction(1, 16))
    path = write_sweep_csv(result, OUT)
    print(f"swept {len(result.rows)} weight triples -> {path}")

    share = Counter(winner for _, winner, _ in result.rows)
    print("\nshare of the preference simplex won:")
    for method, count in share.most_common():
        print(f"  {method:<18} {count:>4} / {len(result.rows)} "
              f"({100 * count / len(result.rows):.0f}%)")

    print("\ncorner preferences:")
    for w, winner, _ in result.rows:
        if 1.0 in (w.w_p, w.w_d, w.w_f):
            name = {0: "proximity", 1: "dpow", 2: "feasibility"}[
                [w.w_p, w.w_d, w.w_f].index(1.0)
            ]
            print(f"  all weight on {name:<12} -> {winner}")


if __name__ == "__main__":
    main()
