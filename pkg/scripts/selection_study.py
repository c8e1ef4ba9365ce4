"""Filter and wrapper feature selection on a generated, oracle-labelled
dataset, followed by the prefix accuracy curve of the filter ordering.

    python3 scripts/selection_study.py --count 300 --jobs 4
"""

import argparse

import numpy as np

from gbcad.dataset import featurize, generate_dataset, label_with, tnoi_drop_oracle
from gbcad.feature_selection import accuracy_curve, filter_select, wrapper_select
from gbcad.features import feature_names
from gbcad.model_selection import REDUCED_GRID, stratified_split


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    a = ap.parse_args()

    records = label_with(generate_dataset(a.count, a.seed), tnoi_drop_oracle)
    X = np.array([fv.values for fv in featurize(records)])
    y = np.array([r.label for r in records])
    tr, te = stratified_split(y, 0.8, a.seed)
    names = feature_names()

    filt = filter_select(X[tr], y[tr])
    print("filter:", ", ".join(f"{f} ({names[f - 1]})" for f in filt.features), f"merit={filt.score:.3f}")

    wrap = wrapper_select(X[tr], y[tr], REDUCED_GRID, seed=a.seed, jobs=a.jobs)
    print("wrapper:", wrap.features, f"cv acc={wrap.score:.3f}", f"C={wrap.params[0]:g} gamma={wrap.params[1]:g}")

    if filt.features:
        cols = [f - 1 for f in filt.features]
        curve = accuracy_curve(X[tr][:, cols], y[tr], list(range(len(cols))), REDUCED_GRID,
                               seed=a.seed, test=(X[te][:, cols], y[te]), jobs=a.jobs)
        for n, cv, test in curve:
            print(f"  first {n:2d} filter features: cv={cv:.3f} test={test:.3f}")


if __name__ == "__main__":
    main()
