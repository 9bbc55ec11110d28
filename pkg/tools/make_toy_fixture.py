"""Build the bundled walkthrough fixture: an 82-candidate dump whose
filter/front/selection trace is 82 -> 77 -> 59 -> 13 -> 1.

The dump replays a census-style query (income >50K, desired <=50K) through
the selection pipeline without a live model: every candidate carries its
stored prediction and criteria. Five candidates are invalid, 18 change
immutable features (race and/or native country), and the 59 survivors
contain a 13-member Pareto front whose per-criterion bests are
proximity 0.04, feasibility 0.11 and discriminative power 1. Under the
Euclidean ideal-point rule the selection is the candidate that only raises
capital.gain to 17327.

Run from the repo root:  python3 tools/make_toy_fixture.py
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "toy_adult_fixture.jsonl"

FEATURES = [
    ("age", "continuous"),
    ("education.num", "continuous"),
    ("capital.gain", "continuous"),
    ("capital.loss", "continuous"),
    ("hours.per.week", "continuous"),
    ("workclass", "categorical"),
    ("marital.status", "categorical"),
    ("occupation", "categorical"),
    ("race", "categorical"),
    ("sex", "categorical"),
    ("native.country", "categorical"),
]
CATEGORIES = {
    "workclass": ["Self-emp-not-inc", "Private", "Federal-gov", "Local-gov"],
    "marital.status": ["Never-married", "Married-civ-spouse", "Divorced"],
    "occupation": ["Prof-specialty", "Exec-managerial", "Sales", "Craft-repair"],
    "race": ["Asian-Pac-Islander", "White", "Black", "Amer-Indian-Eskimo", "Other"],
    "sex": ["Male", "Female"],
    "native.country": ["United-States", "France", "Philippines", "China", "Germany", "India"],
}
IMMUTABLE = {"race", "sex", "native.country"}

X = (24.0, 10.0, 0.0, 0.0, 30.0,
     "Self-emp-not-inc", "Never-married", "Prof-specialty",
     "Asian-Pac-Islander", "Male", "United-States")
PREDICTED_X = ">50K"
DESIRED = "<=50K"

AGE, EDU, CGAIN, CLOSS, HOURS, WORK, MARITAL, OCCUP, RACE, SEX, COUNTRY = range(11)

# Pareto front in raw criteria units (proximity, feasibility, dpow).
# Verified mutually non-dominated; per-criterion bests are 0.04 / 0.11 / 1.0;
# the first entry is the intended Euclidean selection.
CHOSEN_CRITERIA = (0.173, 0.962, 0.11)
FRONT = [
    CHOSEN_CRITERIA,
    (0.04, 1.07, 0.07),
    (0.84, 0.11, 0.08),
    (3.84, 2.51, 1.0),
    (0.24, 0.75, 0.03),
    (0.44, 0.51, 0.05),
    (3.64, 0.27, 0.6),
    (2.84, 2.91, 0.45),
    (2.04, 4.51, 0.4),
    (1.64, 5.71, 0.38),
    (1.24, 6.91, 0.3),
    (3.44, 3.71, 0.8),
    (0.12, 4.11, 0.09),
]
# Criteria-space corners of the survivor set (worst on everything); one
# dominated candidate sits exactly there so the min-max bounds are pinned.
WORST = (4.04, 8.11, 0.0)


def dominated_children(n: int) -> list[tuple[float, float, float]]:
    """n points, each strictly worse than some front member on all criteria."""
    out = []
    k = 0
    while len(out) < n:
        parent = FRONT[k % len(FRONT)]
        step = k // len(FRONT)
        p = min(parent[0] + 0.16 + 0.052 * step, WORST[0] - 0.005 * (k % 7))
        f = min(parent[1] + 0.24 + 0.136 * step, WORST[1] - 0.007 * (k % 5))
        d = max(parent[2] - 0.02 - 0.011 * step, 0.001 * (1 + k % 9))
        out.append((round(p, 6), round(f, 6), round(d, 6)))
        k += 1
    return out


def actionable_values(i: int) -> tuple:
    vals = list(X)
    vals[AGE] = 24.0 + (i % 13)
    vals[HOURS] = 30.0 + ((i * 3) % 21)
    vals[CGAIN] = float(500 * ((i * 7) % 29))
    if i % 4 == 0:
        vals[WORK] = "Private"
    if i % 5 == 0:
        vals[MARITAL] = "Married-civ-spouse"
    if i % 6 == 0:
        vals[OCCUP] = "Exec-managerial"
    return tuple(vals)


def candidate(values, explainer, restart, predicted, criteria=None) -> dict:
    rec = {
        "values": list(values),
        "explainer": explainer,
        "restart": restart,
        "predicted": predicted,
    }
    if criteria is not None:
        rec["criteria"] = {
            "proximity": criteria[0],
            "feasibility": criteria[1],
            "dpow": criteria[2],
        }
    return rec


def build() -> list[dict]:
    chosen_values = list(X)
    chosen_values[CGAIN] = 17327.0

    children = dominated_children(45)
    child_iter = iter(children)
    records: list[dict] = []

    def child_candidate(values, explainer, restart):
        return candidate(values, explainer, restart, DESIRED, next(child_iter))

    # nun: 6 race changers (valid but non-actionable), 1 front member, 3 dominated
    for r in range(6):
        vals = list(actionable_values(r + 40))
        vals[RACE] = ["White", "Black", "Other", "White", "Amer-Indian-Eskimo", "Black"][r]
        records.append(candidate(vals, "nun", r, DESIRED, (0.6 + 0.1 * r, 1.5 + 0.2 * r, 0.5)))
    records.append(candidate(actionable_values(3), "nun", 6, DESIRED, FRONT[1]))
    for r in range(7, 10):
        records.append(child_candidate(actionable_values(r + 50), "nun", r))

    # growing_spheres: 3 race-only, 1 country-only, 8 race+country, 2 front, 6 dominated
    gs_r = 0
    for race in ["White", "Black", "Other"]:
        vals = list(actionable_values(gs_r + 60))
        vals[RACE] = race
        records.append(candidate(vals, "growing_spheres", gs_r, DESIRED,
                                 (1.1 + 0.2 * gs_r, 2.0, 0.4)))
        gs_r += 1
    vals = list(actionable_values(70))
    vals[COUNTRY] = "France"
    records.append(candidate(vals, "growing_spheres", gs_r, DESIRED, (1.0, 2.2, 0.3)))
    gs_r += 1
    both = [("White", "Philippines"), ("White", "China"), ("Black", "Germany"),
            ("White", "India"), ("Other", "France"), ("Black", "Philippines"),
            ("White", "Germany"), ("Amer-Indian-Eskimo", "China")]
    for race, country in both:
        vals = list(actionable_values(gs_r + 65))
        vals[RACE], vals[COUNTRY] = race, country
        records.append(candidate(vals, "growing_spheres", gs_r, DESIRED,
                                 (1.3, 2.4 + 0.1 * gs_r, 0.35)))
        gs_r += 1
    records.append(candidate(actionable_values(8), "growing_spheres", gs_r, DESIRED, FRONT[2]))
    records.append(candidate(actionable_values(9), "growing_spheres", gs_r + 1, DESIRED, FRONT[12]))
    for i in range(6):
        records.append(
            child_candidate(actionable_values(i + 80), "growing_spheres", gs_r + 2 + i)
        )

    # wachter: 3 invalid, 3 front, 1 worst-corner, 10 dominated
    for r in range(3):
        records.append(candidate(actionable_values(r + 90), "wachter", r, PREDICTED_X,
                                 (0.3 + 0.1 * r, 1.0, 0.2)))
    records.append(candidate(actionable_values(11), "wachter", 3, DESIRED, FRONT[3]))
    records.append(candidate(actionable_values(12), "wachter", 4, DESIRED, FRONT[6]))
    records.append(candidate(actionable_values(13), "wachter", 5, DESIRED, FRONT[11]))
    records.append(candidate(actionable_values(14), "wachter", 6, DESIRED, WORST))
    for i in range(10):
        records.append(child_candidate(actionable_values(i + 100), "wachter", 7 + i))

    # cadex: 2 invalid, 2 front, 11 dominated
    for r in range(2):
        records.append(candidate(actionable_values(r + 110), "cadex", r, PREDICTED_X,
                                 (0.5 + 0.1 * r, 1.2, 0.25)))
    records.append(candidate(actionable_values(16), "cadex", 2, DESIRED, FRONT[4]))
    records.append(candidate(actionable_values(17), "cadex", 3, DESIRED, FRONT[5]))
    for i in range(11):
        records.append(child_candidate(actionable_values(i + 115), "cadex", 4 + i))

    # dice: the selected candidate, 4 more front members, 15 dominated
    records.append(candidate(chosen_values, "dice", 0, DESIRED, CHOSEN_CRITERIA))
    for r, front_idx in enumerate([7, 8, 9, 10], start=1):
        records.append(candidate(actionable_values(r + 20), "dice", r, DESIRED, FRONT[front_idx]))
    for i in range(15):
        records.append(child_candidate(actionable_values(i + 130), "dice", 5 + i))

    assert len(records) == 82, len(records)
    return records


def verify(records: list[dict]) -> None:
    import sys

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
    from cfselect.explainers import load_candidates
    from cfselect.pipeline import replay

    dump = load_candidates(OUT)
    result = replay(dump, metric="L2")
    counts = result.counts.as_tuple()
    assert counts == (82, 77, 59, 13, 1), counts
    ideal = tuple(round(v, 9) for v in result.ideal.raw)
    assert ideal == (0.04, 0.11, 1.0), ideal
    assert result.chosen.values[CGAIN] == 17327.0
    diffs = [
        i for i in range(len(X))
        if result.chosen.values[i] != X[i]
    ]
    assert diffs == [CGAIN], diffs
    print(f"verified: counts {counts}, ideal {ideal}, "
          f"selection changes only capital.gain")


def main() -> None:
    records = build()
    query = {
        "kind": "query",
        "values": list(X),
        "predicted": PREDICTED_X,
        "desired_class": DESIRED,
        "schema": {
            "features": [
                {
                    "name": name,
                    "kind": kind,
                    "immutable": name in IMMUTABLE,
                    **({"categories": CATEGORIES[name]} if kind == "categorical" else {}),
                }
                for name, kind in FEATURES
            ]
        },
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(query) + "\n")
        for rec in build():
            fh.write(json.dumps(rec) + "\n")
    print(f"wrote {OUT} ({len(records)} candidates)")
    verify(records)


if __name__ == "__main__":
    main()
