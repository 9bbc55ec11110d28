"""Generate the bundled German-credit-style dataset.

Synthetic but structurally faithful stand-in for the classic credit-scoring
table: 1000 rows, 7 continuous and 13 categorical features, a binary
good/bad label at roughly 70/30, and `foreign_worker` as the designated
immutable feature. Labels come from a noisy logistic score over a handful
of features so the black box has real signal to learn.

Run from the repo root:  python3 tools/make_german_data.py
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SEED = 20240817
N_ROWS = 1000
OUT = Path(__file__).resolve().parent.parent / "data" / "german_credit.csv"

CATEGORIES = {
    "checking_status": ["<0", "0<=X<200", ">=200", "no checking"],
    "credit_history": [
        "no credits", "all paid", "existing paid", "delayed previously", "critical",
    ],
    "purpose": [
        "new car", "used car", "furniture", "radio/tv", "education",
        "business", "repairs", "domestic appliance", "retraining", "other",
    ],
    "savings_status": ["<100", "100<=X<500", "500<=X<1000", ">=1000", "no known savings"],
    "employment": ["unemployed", "<1", "1<=X<4", "4<=X<7", ">=7"],
    "personal_status": ["male single", "female div/dep/mar", "male div/sep", "male mar/wid"],
    "other_parties": ["none", "guarantor", "co applicant"],
    "property_magnitude": ["real estate", "life insurance", "car", "no known property"],
    "other_payment_plans": ["none", "bank", "stores"],
    "housing": ["own", "rent", "for free"],
    "job": ["skilled", "unskilled resident", "high qualif", "unemployed non res"],
    "own_telephone": ["yes", "none"],
    "foreign_worker": ["yes", "no"],
}

CAT_PROBS = {
    "checking_status": [0.27, 0.27, 0.06, 0.40],
    "credit_history": [0.04, 0.05, 0.53, 0.09, 0.29],
    "purpose": [0.23, 0.10, 0.18, 0.28, 0.05, 0.09, 0.02, 0.01, 0.01, 0.03],
    "savings_status": [0.60, 0.10, 0.06, 0.06, 0.18],
    "employment": [0.06, 0.17, 0.34, 0.17, 0.26],
    "personal_status": [0.55, 0.31, 0.05, 0.09],
    "other_parties": [0.91, 0.05, 0.04],
    "property_magnitude": [0.28, 0.23, 0.33, 0.16],
    "other_payment_plans": [0.81, 0.14, 0.05],
    "housing": [0.71, 0.18, 0.11],
    "job": [0.63, 0.20, 0.15, 0.02],
    "own_telephone": [0.40, 0.60],
    "foreign_worker": [0.90, 0.10],
}

CONTINUOUS = [
    "duration", "credit_amount", "installment_commitment", "residence_since",
    "age", "existing_credits", "num_dependents",
]


def sample_rows(rng: np.random.Generator) -> list[dict]:
    rows = []
    for _ in range(N_ROWS):
        row: dict = {}
        for name, cats in CATEGORIES.items():
            row[name] = cats[rng.choice(len(cats), p=CAT_PROBS[name])]
        row["duration"] = int(np.clip(rng.gamma(3.2, 6.5), 4, 72))
        row["credit_amount"] = int(np.clip(rng.lognormal(7.8, 0.75), 250, 18500))
        row["installment_commitment"] = int(rng.integers(1, 5))
        row["residence_since"] = int(rng.integers(1, 5))
        row["age"] = int(np.clip(rng.gamma(8.0, 4.5), 19, 75))
        row["existing_credits"] = int(np.clip(rng.poisson(0.5) + 1, 1, 4))
        row["num_dependents"] = int(1 + (rng.random() < 0.15))
        rows.append(row)
    return rows


def credit_score(row: dict) -> float:
    """Latent creditworthiness; higher means more likely 'good'."""
    checking = {"<0": -1.0, "0<=X<200": -0.3, ">=200": 0.5, "no checking": 0.9}
    savings = {"<100": -0.5, "100<=X<500": -0.1, "500<=X<1000": 0.3,
               ">=1000": 0.7, "no known savings": 0.2}
    history = {"no credits": -0.4, "all paid": -0.2, "existing paid": 0.2,
               "delayed previously": -0.5, "critical": 0.4}
    employment = {"unemployed": -0.6, "<1": -0.3, "1<=X<4": 0.1,
                  "4<=X<7": 0.3, ">=7": 0.5}
    housing = {"own": 0.3, "rent": -0.1, "for free": -0.2}

    score = 0.0
    score += 1.3 * checking[row["checking_status"]]
    score += 0.9 * savings[row["savings_status"]]
    score += 0.8 * history[row["credit_history"]]
    score += 0.7 * employment[row["employment"]]
    score += 0.4 * housing[row["housing"]]
    score -= 0.045 * (row["duration"] - 21)
    score -= 0.00012 * (row["credit_amount"] - 3200)
    score += 0.018 * (row["age"] - 35)
    score -= 0.15 * (row["installment_commitment"] - 2.5)
    score -= 0.25 * (row["num_dependents"] - 1)
    score += 0.1 if row["other_parties"] == "guarantor" else 0.0
    score -= 0.2 if row["other_payment_plans"] != "none" else 0.0
    return score


def main() -> None:
    rng = np.random.default_rng(SEED)
    rows = sample_rows(rng)
    scores = np.array([credit_score(r) for r in rows])
    noisy = scores + rng.normal(scale=0.55, size=len(rows))
    threshold = np.quantile(noisy, 0.30)  # ~70% good
    labels = ["good" if s > threshold else "bad" for s in noisy]

    header = CONTINUOUS[:2] + ["checking_status", "credit_history", "purpose",
                               "savings_status", "employment"] \
        + CONTINUOUS[2:4] + ["personal_status", "other_parties"] \
        + CONTINUOUS[4:5] + ["property_magnitude", "other_payment_plans", "housing"] \
        + CONTINUOUS[5:] + ["job", "own_telephone", "foreign_worker"]

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header + ["class"])
        for row, label in zip(rows, labels):
            writer.writerow([row[c] for c in header] + [label])
    good = sum(1 for l in labels if l == "good")
    print(f"wrote {OUT} ({len(rows)} rows, {good} good / {len(rows) - good} bad)")


if __name__ == "__main__":
    main()
