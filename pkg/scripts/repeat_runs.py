"""Repeat the protocol with seeds seed..seed+R-1 on several feature subsets
and write one CSV row per run (box-plot data).

    python3 scripts/repeat_runs.py --count 300 --repeats 10 --out runs.csv
"""

import argparse
import csv

import numpy as np

from gbcad.dataset import feature_set_indices, featurize, generate_dataset, label_with, tnoi_drop_oracle
from gbcad.model_selection import REDUCED_GRID, repeat_runs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="runs.csv")
    a = ap.parse_args()

    records = label_with(generate_dataset(a.count, a.seed), tnoi_drop_oracle)
    X = np.array([fv.values for fv in featurize(records)])
    y = np.array([r.label for r in records])
    sets = {name: feature_set_indices(name) for name in ("before", "after", "all")}
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature_set", "run", "accuracy", "mcc"])
        for name, idx in sets.items():
            runs = repeat_runs(X[:, [i - 1 for i in idx]], y, REDUCED_GRID, a.seed, a.repeats, jobs=a.jobs)
            accs = [r.accuracy for r in runs]
            print(f"{name:>6}: median acc={np.median(accs):.3f} range=[{min(accs):.3f}, {max(accs):.3f}]")
            for r in runs:
                w.writerow([name, r.run, repr(r.accuracy), repr(r.mcc)])


if __name__ == "__main__":
    main()
