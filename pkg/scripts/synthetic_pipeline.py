"""Generate problems, label them with the TNoI-drop oracle, and run the
split / grid search / test protocol on the before, after and all feature sets.

    python3 scripts/synthetic_pipeline.py --count 600 --seed 1 --grid reduced
"""

import argparse
import time

import numpy as np

from gbcad.dataset import feature_set_indices, featurize, generate_dataset, label_with, tnoi_drop_oracle
from gbcad.model_selection import FULL_GRID, REDUCED_GRID, run_protocol


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=600)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", choices=["full", "reduced"], default="reduced")
    ap.add_argument("--jobs", type=int, default=1)
    a = ap.parse_args()

    t0 = time.perf_counter()
    records = label_with(generate_dataset(a.count, a.seed), tnoi_drop_oracle)
    X = np.array([fv.values for fv in featurize(records)])
    y = np.array([r.label for r in records])
    print(f"{len(y)} problems, {int((y == 1).sum())} positive, built in {time.perf_counter() - t0:.1f}s")

    grid = FULL_GRID if a.grid == "full" else REDUCED_GRID
    for name in ("before", "after", "all"):
        idx = feature_set_indices(name)
        res = run_protocol(X[:, [i - 1 for i in idx]], y, grid, a.seed, feature_indices=idx, jobs=a.jobs)
        c = res.counts
        print(f"{name:>6}: acc={res.accuracy:.3f} mcc={res.mcc:.3f} "
              f"tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn} gamma={res.gamma:g} C={res.c:g}")


if __name__ == "__main__":
    main()
