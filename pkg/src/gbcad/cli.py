"""Command-line front end.

Exit codes: 0 success, 1 computation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

import numpy as np

from . import dataset as ds
from .features import Decision, feature_count, feature_names, tnoi_decision
from .feature_selection import accuracy_curve, filter_select, wrapper_select
from .groebner import ResourceExhausted, buchberger
from .model_selection import FULL_GRID, REDUCED_GRID, Grid, evaluate, repeat_runs, run_protocol, stratified_split
from .polynomial import PolynomialError, format_polynomial
from .svm import SvmError, SvmModel, accuracy, confusion, mcc

log = logging.getLogger("gbcad")


class UsageError(Exception):
    pass


def _grid(choice: str) -> Grid:
    if choice == "full":
        return FULL_GRID
    if choice == "reduced":
        return REDUCED_GRID
    try:
        with open(choice) as fh:
            d = json.load(fh)
        return Grid(tuple(float(v) for v in d["gamma"]), tuple(float(v) for v in d["c"]))
    except (OSError, KeyError, ValueError, TypeError) as e:
        raise UsageError(f"bad grid {choice!r}: {e}") from None


def _indices(text: str, order=ds.DEFAULT_ORDER) -> List[int]:
    if text in ds.FEATURE_SETS:
        return ds.feature_set_indices(text, order)
    try:
        idx = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad feature set {text!r}") from None
    n = feature_count(order)
    if not idx or len(set(idx)) != len(idx) or not all(1 <= i <= n for i in idx):
        raise UsageError(f"feature indices must be distinct values in 1..{n}: {text!r}")
    return idx


def _read_problems(path) -> List[ds.ProblemRecord]:
    try:
        records = ds.read_problems(path)
    except OSError as e:
        raise UsageError(str(e)) from None
    except ds.DatasetError as e:
        raise UsageError(f"{path}: {e}") from None
    if not records:
        raise UsageError(f"{path}: no problems")
    return records


def _read_features(path, subset: Optional[str] = None, require_labels: bool = True) -> ds.FeatureTable:
    try:
        table = ds.read_features(path, require_labels)
    except OSError as e:
        raise UsageError(str(e)) from None
    except (ds.DatasetError, ValueError) as e:
        raise UsageError(str(e)) from None
    if subset is not None:
        try:
            table = table.select(_indices(subset))
        except ds.DatasetError as e:
            raise UsageError(str(e)) from None
    return table


def cmd_gen(a) -> int:
    try:
        profile = ds.GenerationProfile(degrees=tuple(int(d) for d in a.degrees.split(",")))
        records = ds.generate_dataset(a.count, a.seed, profile)
    except ValueError as e:
        raise UsageError(str(e)) from None
    ds.write_problems(records, a.out)
    log.info("wrote %d problems to %s", len(records), a.out)
    return 0


def cmd_gb(a) -> int:
    records = _read_problems(a.problems)
    out = []
    for r in records:
        order = r.variable_order()
        E = [ds.parse_polynomial(s, order) for s in r.E]
        G = buchberger(E, step_limit=a.step_limit)
        out.append(replace(r, G=[format_polynomial(g) for g in G]))
    ds.write_problems(out, a.out)
    return 0


def cmd_label(a) -> int:
    records = _read_problems(a.problems)
    if a.cells:
        try:
            counts = ds.read_cell_counts(a.cells)
            records = ds.attach_labels(records, counts)
        except (OSError, KeyError, ValueError) as e:
            raise UsageError(str(e)) from None
    else:
        records = ds.label_with(records, ds.tnoi_drop_oracle)
    ds.write_problems(records, a.out)
    return 0


def cmd_featurize(a) -> int:
    records = _read_problems(a.problems)
    order = records[0].variable_order()
    ds.export_features(records, a.out, _indices(a.set, order), require_labels=False)
    return 0


def cmd_train(a) -> int:
    table = _read_features(a.features, a.set)
    grid = _grid(a.grid)
    try:
        res = run_protocol(
            table.X, table.y, grid, a.seed, k=a.folds, train_fraction=a.train_fraction,
            feature_indices=table.indices, jobs=a.jobs,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None
    res.model.save(a.model)
    if a.cv_report:
        res.cv.write_csv(a.cv_report)
    if a.test_out:
        sub = table.rows(res.test_index)
        _write_table(sub, a.test_out)
    _emit(a, {
        "gamma": res.gamma,
        "c": res.c,
        "cv_mcc": res.cv.mean_mcc[res.cv.best],
        "test": _metrics(res.counts),
    })
    return 0


def _write_table(t: ds.FeatureTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"f{i}" for i in t.indices] + ["label"])
        for k, rid in enumerate(t.ids):
            w.writerow([rid] + [repr(float(v)) for v in t.X[k]] + [int(t.y[k])])


def _metrics(c) -> dict:
    return {
        "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn,
        "accuracy": accuracy(c) if c.total else None,
        "mcc": mcc(c),
        "n": c.total,
    }


def _emit(a, obj) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True)
    if getattr(a, "out", None):
        with open(a.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_model(path) -> SvmModel:
    try:
        return SvmModel.load(path)
    except (OSError, KeyError, ValueError) as e:
        raise UsageError(f"cannot load model {path}: {e}") from None


def _model_view(model: SvmModel, table: ds.FeatureTable) -> np.ndarray:
    try:
        return table.select(model.feature_indices).X
    except ds.DatasetError as e:
        raise UsageError(f"feature set does not match model: {e}") from None


def cmd_predict(a) -> int:
    model = _load_model(a.model)
    table = _read_features(a.features, require_labels=False)
    dv = model.decision_values(_model_view(model, table))
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "decision_value", "prediction", "decision"])
        for rid, v in zip(table.ids, dv):
            p = 1 if v >= 0 else -1
            w.writerow([rid, repr(float(v)), p, (Decision.PRECONDITION if p == 1 else Decision.DO_NOT).value])
    return 0


def cmd_eval(a) -> int:
    if not a.model and a.baseline != "tnoi":
        raise UsageError("eval needs --model and/or --baseline tnoi")
    report = {}
    if a.model:
        if not a.features:
            raise UsageError("--model requires --features")
        model = _load_model(a.model)
        table = _read_features(a.features)
        counts, _, _ = evaluate(model, _model_view(model, table), table.y)
        report["model"] = _metrics(counts)
    if a.baseline == "tnoi":
        if not a.problems:
            raise UsageError("--baseline tnoi requires --problems")
        records = _read_problems(a.problems)
        if a.features and a.model:
            keep = set(_read_features(a.features).ids)
            records = [r for r in records if r.id in keep]
        decisions = {r.id: tnoi_decision(r.problem(), r.basis()) for r in records}
        labeled = [r for r in records if r.label is not None]
        pred = [1 if decisions[r.id] is Decision.PRECONDITION else -1 for r in labeled]
        c = confusion([r.label for r in labeled], pred)
        report["tnoi"] = {
            "decisions": {k: v.value for k, v in decisions.items()},
            "metrics": _metrics(c),
        }
    _emit(a, report)
    return 0


def cmd_select(a) -> int:
    table = _read_features(a.features, a.set)
    names = feature_names()
    try:
        if a.method == "filter":
            rep = filter_select(table.X, table.y, table.indices)
        else:
            rep = wrapper_select(table.X, table.y, _grid(a.grid), a.folds, a.seed, table.indices, a.jobs)
    except ValueError as e:
        raise UsageError(str(e)) from None
    rep.write_csv(a.out, names)
    return 0


def cmd_report(a) -> int:
    table = _read_features(a.features)
    grid = _grid(a.grid)
    if a.kind == "accuracy-curve":
        if not a.order:
            raise UsageError("accuracy-curve needs --order")
        order = _indices(a.order)
        t = table.select(order)
        tr, te = stratified_split(t.y, a.train_fraction, a.seed)
        curve = accuracy_curve(
            t.X[tr], t.y[tr], list(range(len(order))), grid, a.folds, a.seed,
            test=(t.X[te], t.y[te]), jobs=a.jobs,
        )
        with open(a.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["prefix_size", "feature_index", "cv_accuracy", "test_accuracy"])
            for (n, cv, test), f in zip(curve, order):
                w.writerow([n, f, repr(cv), repr(test)])
        return 0
    sets = a.sets or ["all=all"]
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature_set", "run", "seed", "gamma", "c", "accuracy", "mcc"])
        for text in sets:
            name, _, idx = text.partition("=")
            t = table.select(_indices(idx or name))
            for r in repeat_runs(t.X, t.y, grid, a.seed, a.repeats, k=a.folds,
                                 train_fraction=a.train_fraction, feature_indices=t.indices, jobs=a.jobs):
                w.writerow([name, r.run, r.seed, repr(r.gamma), repr(r.c), repr(r.accuracy), repr(r.mcc)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gbcad", description="Learn when Groebner preconditioning helps CAD.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, jobs=False, grid=None, folds=False):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        if jobs:
            sp.add_argument("--jobs", type=int, default=1, help="worker processes; output is identical for any value")
        if grid:
            sp.add_argument("--grid", default=grid, help="full | reduced | JSON file with 'gamma' and 'c' lists")
        if folds:
            sp.add_argument("--folds", type=int, default=5)

    s = sub.add_parser("gen", help="generate random problems")
    s.add_argument("--count", type=int, default=1200)
    s.add_argument("--degrees", default="2,3,4")
    s.add_argument("--out", required=True)
    common(s)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("gb", help="add the reduced Groebner basis of E to each problem")
    s.add_argument("--problems", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--step-limit", type=int, default=None)
    s.set_defaults(func=cmd_gb)

    s = sub.add_parser("label", help="label problems from a cell-count CSV or the TNoI-drop oracle")
    s.add_argument("--problems", required=True)
    s.add_argument("--out", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--cells", help="CSV with id, cells_plain, cells_gb")
    g.add_argument("--oracle", choices=["tnoi-drop"])
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("featurize", help="write the feature matrix CSV")
    s.add_argument("--problems", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--set", default="all", help="before | after | all | comma-separated indices")
    s.set_defaults(func=cmd_featurize)

    s = sub.add_parser("train", help="split, grid search, fit and test")
    s.add_argument("--features", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--cv-report")
    s.add_argument("--test-out", help="write the held-out rows here")
    s.add_argument("--out", help="metrics JSON (default stdout)")
    s.add_argument("--set", default=None)
    s.add_argument("--train-fraction", type=float, default=0.8)
    common(s, jobs=True, grid="full", folds=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="PRECONDITION / DO_NOT per problem")
    s.add_argument("--model", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", help="metrics for a model and/or the TNoI baseline")
    s.add_argument("--model")
    s.add_argument("--features")
    s.add_argument("--problems")
    s.add_argument("--baseline", choices=["tnoi"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("select", help="filter or wrapper feature selection")
    s.add_argument("--features", required=True)
    s.add_argument("--method", choices=["filter", "wrapper"], required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--set", default=None)
    common(s, jobs=True, grid="reduced", folds=True)
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("report", help="figure data: accuracy-curve or repeat-runs")
    s.add_argument("kind", choices=["accuracy-curve", "repeat-runs"])
    s.add_argument("--features", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--order", help="ordered feature indices for accuracy-curve")
    s.add_argument("--sets", action="append", help="NAME=indices or before/after/all; repeatable")
    s.add_argument("--repeats", type=int, default=50)
    s.add_argument("--train-fraction", type=float, default=0.8)
    common(s, jobs=True, grid="reduced", folds=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(a, "folds", 2) < 2:
        print("error: --folds must be at least 2", file=sys.stderr)
        return 2
    if getattr(a, "jobs", 1) < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return 2
    try:
        return a.func(a)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ResourceExhausted, SvmError, PolynomialError, ValueError) as e:
        print(f"failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
