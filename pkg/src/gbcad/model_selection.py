"""Standardization, stratified splitting and MCC-driven grid search."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .svm import ConfusionCounts, SvmError, SvmModel, SvmParams, accuracy, confusion, mcc, train

# named sub-streams so that one seed drives every random choice
STREAMS = {"generate": 0, "split": 1, "folds": 2, "wrapper": 3, "repeat": 4}


def rng_for(seed: int, stream: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), STREAMS[stream]])


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale


def fit_standardizer(X) -> Standardizer:
    """Population mean/std per column; zero-variance columns get scale 1."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("cannot fit a standardizer on an empty training set")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # relative guard: float noise on a constant column must not blow up
    tiny = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    return Standardizer(mean, np.where(tiny, 1.0, std))


def apply_standardizer(s: Standardizer, X) -> np.ndarray:
    return s.transform(X)


@dataclass(frozen=True)
class Grid:
    gamma_values: Tuple[float, ...]
    c_values: Tuple[float, ...]

    def __post_init__(self):
        if not self.gamma_values or not self.c_values:
            raise ValueError("grid must be non-empty")
        if min(self.gamma_values) <= 0 or min(self.c_values) <= 0:
            raise ValueError("grid values must be positive")

    def cells(self) -> List[Tuple[float, float]]:
        return [(g, c) for g in self.gamma_values for c in self.c_values]

    def __len__(self) -> int:
        return len(self.gamma_values) * len(self.c_values)


FULL_GRID = Grid(tuple(2.0**k for k in range(-15, 4)), tuple(2.0**k for k in range(-5, 16)))
REDUCED_GRID = Grid(tuple(2.0**k for k in range(-10, -4)), tuple(2.0**k for k in range(5, 11)))


def _check_classes(y) -> None:
    y = np.asarray(y)
    if not ((y == 1).any() and (y == -1).any()):
        raise ValueError("both classes must be present")


def stratified_split(y, train_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return sorted (train, test) index arrays preserving class proportions.

    The test part gets ceil((1 - fraction) * n) rows, allocated to classes by
    largest remainder.
    """
    y = np.asarray(y)
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    _check_classes(y)
    n = len(y)
    n_test = math.ceil((1 - train_fraction) * n - 1e-9)
    classes = [1, -1]
    sizes = {c: int(np.sum(y == c)) for c in classes}
    quota = {c: (1 - train_fraction) * sizes[c] for c in classes}
    alloc = {c: int(math.floor(quota[c] + 1e-9)) for c in classes}
    rest = n_test - sum(alloc.values())
    for c in sorted(classes, key=lambda c: (-(quota[c] - alloc[c]), -c)):
        if rest <= 0:
            break
        if alloc[c] < sizes[c]:
            alloc[c] += 1
            rest -= 1
    rng = rng_for(seed, "split")
    train_idx, test_idx = [], []
    for c in classes:
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(len(idx))]
        test_idx.append(idx[: alloc[c]])
        train_idx.append(idx[alloc[c] :])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(test_idx))


def stratified_kfold(y, k: int, seed: int) -> List[np.ndarray]:
    """Disjoint folds; rows of each class are dealt round-robin after shuffling."""
    y = np.asarray(y)
    if k < 2:
        raise ValueError("k must be at least 2")
    for c in (1, -1):
        if np.sum(y == c) < k:
            raise ValueError(f"class {c:+d} has fewer than {k} members")
    rng = rng_for(seed, "folds")
    ordered = np.concatenate([np.flatnonzero(y == c)[rng.permutation(int(np.sum(y == c)))] for c in (1, -1)])
    return [np.sort(ordered[f::k]) for f in range(k)]


def fit_model(X, y, params: SvmParams, feature_indices: Sequence[int] = ()) -> SvmModel:
    s = fit_standardizer(X)
    return train(s.transform(X), y, params, feature_indices, standardizer=s)


def evaluate(model: SvmModel, X, y) -> Tuple[ConfusionCounts, float, float]:
    y = np.asarray(y)
    if len(y) == 0:
        raise ValueError("empty test set")
    c = confusion(y, model.predict_many(X))
    return c, accuracy(c), mcc(c)


@dataclass
class FoldResult:
    gamma: float
    c: float
    fold: int
    counts: Optional[ConfusionCounts]
    error: Optional[str] = None

    @property
    def mcc(self) -> float:
        return mcc(self.counts) if self.counts else -math.inf

    @property
    def accuracy(self) -> float:
        return accuracy(self.counts) if self.counts else 0.0


@dataclass
class CvReport:
    folds: List[FoldResult]
    mean_mcc: Dict[Tuple[float, float], float]
    mean_accuracy: Dict[Tuple[float, float], float]
    best: Tuple[float, float]
    feature_indices: List[int] = field(default_factory=list)

    @property
    def best_gamma(self) -> float:
        return self.best[0]

    @property
    def best_c(self) -> float:
        return self.best[1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["gamma", "c", "fold", "tp", "fp", "tn", "fn", "mcc", "accuracy"])
            for f in self.folds:
                if f.counts is None:
                    w.writerow([repr(f.gamma), repr(f.c), f.fold, "", "", "", "", "", ""])
                else:
                    k = f.counts
                    w.writerow([repr(f.gamma), repr(f.c), f.fold, k.tp, k.fp, k.tn, k.fn, repr(f.mcc), repr(f.accuracy)])


def _run_cell(args) -> List[FoldResult]:
    X, y, folds, gamma, C, tol = args
    out = []
    all_idx = np.arange(len(y))
    for f, held in enumerate(folds):
        tr = np.setdiff1d(all_idx, held, assume_unique=True)
        try:
            model = fit_model(X[tr], y[tr], SvmParams(C=C, gamma=gamma, kkt_tolerance=tol))
            counts = confusion(y[held], model.predict_many(X[held]))
            out.append(FoldResult(gamma, C, f, counts))
        except (SvmError, ValueError) as e:
            out.append(FoldResult(gamma, C, f, None, str(e)))
    return out


def map_cells(fn, tasks: Sequence, jobs: int = 1) -> List:
    """Ordered map; results are keyed by task position whatever the worker count."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


def grid_search(
    X,
    y,
    grid: Grid,
    k: int = 5,
    seed: int = 0,
    feature_indices: Sequence[int] = (),
    jobs: int = 1,
    kkt_tolerance: float = 1e-3,
) -> CvReport:
    """k-fold CV per (gamma, C); pick max mean MCC, ties to smallest C then gamma."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    _check_classes(y)
    folds = stratified_kfold(y, k, seed)
    cells = grid.cells()
    results = map_cells(_run_cell, [(X, y, folds, g, c, kkt_tolerance) for g, c in cells], jobs)
    all_folds: List[FoldResult] = []
    mean_mcc, mean_acc = {}, {}
    for (g, c), res in zip(cells, results):
        all_folds.extend(res)
        ok = [r for r in res if r.counts is not None]
        mean_mcc[(g, c)] = float(np.mean([r.mcc for r in ok])) if ok else -math.inf
        mean_acc[(g, c)] = float(np.mean([r.accuracy for r in ok])) if ok else 0.0
    best = max(cells, key=lambda gc: (mean_mcc[gc], -gc[1], -gc[0]))
    return CvReport(all_folds, mean_mcc, mean_acc, best, list(feature_indices))


def cv_accuracy(X, y, folds: Sequence[np.ndarray], params: SvmParams) -> float:
    """Mean held-out accuracy over the given folds (failed folds score 0)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    all_idx = np.arange(len(y))
    scores = []
    for held in folds:
        tr = np.setdiff1d(all_idx, held, assume_unique=True)
        try:
            model = fit_model(X[tr], y[tr], params)
            scores.append(accuracy(confusion(y[held], model.predict_many(X[held]))))
        except (SvmError, ValueError):
            scores.append(0.0)
    return float(np.mean(scores))


@dataclass
class RunResult:
    run: int
    seed: int
    gamma: float
    c: float
    counts: ConfusionCounts
    accuracy: float
    mcc: float
    cv: Optional[CvReport] = None
    model: Optional[SvmModel] = None
    test_index: Optional[np.ndarray] = None


def run_protocol(
    X,
    y,
    grid: Grid,
    seed: int,
    k: int = 5,
    train_fraction: float = 0.8,
    feature_indices: Sequence[int] = (),
    jobs: int = 1,
    run: int = 0,
) -> RunResult:
    """Stratified split, grid search on the training part, refit, score on test."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    tr, te = stratified_split(y, train_fraction, seed)
    report = grid_search(X[tr], y[tr], grid, k, seed, feature_indices, jobs)
    gamma, C = report.best
    model = fit_model(X[tr], y[tr], SvmParams(C=C, gamma=gamma), feature_indices)
    counts, acc, m = evaluate(model, X[te], y[te])
    return RunResult(run, seed, gamma, C, counts, acc, m, report, model, te)


def repeat_runs(X, y, grid: Grid, seed: int, repeats: int, **kw) -> List[RunResult]:
    """Repeat the protocol with seeds ``seed + r``."""
    return [run_protocol(X, y, grid, seed + r, run=r, **kw) for r in range(repeats)]
