"""Correlation-based (filter) and SVM-accuracy (wrapper) feature selection.

Discretization follows Fayyad & Irani's MDLP: recursive binary splits at
class-boundary midpoints, each accepted only if its information gain beats
``(log2(N-1) + delta) / N`` with
``delta = log2(3**c - 2) - (c*H(S) - c1*H(S1) - c2*H(S2))``.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .model_selection import REDUCED_GRID, Grid, cv_accuracy, map_cells, stratified_kfold
from .svm import SvmParams

log = logging.getLogger(__name__)


def entropy(counts) -> float:
    c = np.asarray(counts, dtype=float).ravel()
    if np.any(c < 0):
        raise ValueError("negative count")
    total = c.sum()
    if total <= 0:
        raise ValueError("entropy of an empty histogram")
    p = c[c > 0] / total
    return float(max(0.0, -np.sum(p * np.log2(p))))


def conditional_entropy(joint) -> float:
    """H(X | Y) for a table with rows indexed by Y and columns by X."""
    t = np.asarray(joint, dtype=float)
    total = t.sum()
    if total <= 0:
        raise ValueError("empty contingency table")
    return float(sum(row.sum() / total * entropy(row) for row in t if row.sum() > 0))


def information_gain(joint) -> float:
    t = np.asarray(joint, dtype=float)
    return max(0.0, entropy(t.sum(axis=0)) - conditional_entropy(t))


def symmetric_uncertainty(joint) -> float:
    """2 * IG / (H(X) + H(Y)); 0 when both variables are constant."""
    t = np.asarray(joint, dtype=float)
    hx = entropy(t.sum(axis=0))
    hy = entropy(t.sum(axis=1))
    if hx + hy <= 0:
        return 0.0
    return float(min(1.0, 2.0 * information_gain(t) / (hx + hy)))


def contingency(a, b) -> np.ndarray:
    """Counts table with rows indexed by values of ``a`` and columns by ``b``."""
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    t = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(t, (ai, bi), 1)
    return t


def su_between(a, b) -> float:
    return symmetric_uncertainty(contingency(a, b))


@dataclass
class DiscretizedColumn:
    cut_points: List[float]
    intervals: np.ndarray

    @property
    def n_intervals(self) -> int:
        return len(self.cut_points) + 1


def _class_entropy(y: np.ndarray) -> Tuple[float, int]:
    _, counts = np.unique(y, return_counts=True)
    return entropy(counts), len(counts)


def mdl_accepts(y: np.ndarray, split: int) -> Tuple[bool, float, float]:
    """MDLP test for cutting sorted labels ``y`` before position ``split``.

    Returns (accepted, gain, threshold).
    """
    N = len(y)
    h, c = _class_entropy(y)
    h1, c1 = _class_entropy(y[:split])
    h2, c2 = _class_entropy(y[split:])
    gain = h - (split * h1 + (N - split) * h2) / N
    delta = math.log2(3**c - 2) - (c * h - c1 * h1 - c2 * h2)
    threshold = (math.log2(N - 1) + delta) / N
    return gain > threshold, gain, threshold


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    tot = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(counts > 0, counts / tot, 1.0)
        return -np.sum(np.where(counts > 0, p * np.log2(p), 0.0), axis=1)


def _best_cut(v: np.ndarray, y: np.ndarray) -> Optional[int]:
    """Position ``k`` minimising the weighted class entropy of ``y[:k] | y[k:]``.

    Candidates are boundary points: value changes where the two adjacent
    runs of equal values are not both pure in the same class.
    """
    N = len(y)
    _, yi = np.unique(y, return_inverse=True)
    onehot = np.eye(yi.max() + 1)[yi]
    left = np.cumsum(onehot, axis=0)[:-1]  # row k-1 = counts of y[:k]
    right = left[-1] + onehot[-1] - left
    ks = np.arange(1, N)
    change = v[1:] != v[:-1]
    if not change.any():
        return None
    # run id per position, and whether each run is pure
    run = np.concatenate(([0], np.cumsum(change)))
    n_runs = run[-1] + 1
    first_class = np.full(n_runs, -1)
    pure = np.ones(n_runs, dtype=bool)
    for r, c in zip(run, yi):
        if first_class[r] < 0:
            first_class[r] = c
        elif first_class[r] != c:
            pure[r] = False
    a, b = run[:-1], run[1:]
    boundary = change & ~(pure[a] & pure[b] & (first_class[a] == first_class[b]))
    if not boundary.any():
        return None
    e = (ks * _entropy_rows(left) + (N - ks) * _entropy_rows(right)) / N
    e = np.where(boundary, e, np.inf)
    return int(ks[int(np.argmin(e))])


def mdl_discretize(values, labels) -> DiscretizedColumn:
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    if len(values) == 0 or len(values) != len(labels):
        raise ValueError("values and labels must be non-empty and equal length")
    order = np.argsort(values, kind="stable")
    v, y = values[order], labels[order]
    cuts: List[float] = []
    stack = [(0, len(v))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        k = _best_cut(v[lo:hi], y[lo:hi])
        if k is None:
            continue
        ok, _, _ = mdl_accepts(y[lo:hi], k)
        if not ok:
            continue
        cuts.append((v[lo + k - 1] + v[lo + k]) / 2.0)
        stack.append((lo, lo + k))
        stack.append((lo + k, hi))
    cuts.sort()
    return DiscretizedColumn(cuts, np.searchsorted(cuts, values, side="right"))


def merit_gs(k: int, mean_rci: float, mean_rii: float) -> float:
    """Subset merit  k r_ci / sqrt(k + k (k-1) r_ii)."""
    if k < 1:
        raise ValueError("subset size must be at least 1")
    return k * mean_rci / math.sqrt(k + k * (k - 1) * mean_rii)


@dataclass
class SuTables:
    """Feature-class and feature-feature symmetric uncertainties."""

    rc: np.ndarray
    rff: np.ndarray

    def merit(self, subset: Sequence[int]) -> float:
        s = list(subset)
        k = len(s)
        if k == 0:
            return 0.0
        rci = float(np.mean(self.rc[s]))
        if k == 1:
            return merit_gs(1, rci, 0.0)
        block = self.rff[np.ix_(s, s)]
        rii = float((block.sum() - np.trace(block)) / (k * (k - 1)))
        return merit_gs(k, rci, rii)


def su_tables(X, y) -> SuTables:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    cols = [mdl_discretize(X[:, j], y).intervals for j in range(X.shape[1])]
    m = len(cols)
    rc = np.array([su_between(c, y) for c in cols])
    rff = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            rff[i, j] = rff[j, i] = su_between(cols[i], cols[j])
    # a single interval carries no information about anything
    for i, c in enumerate(cols):
        if len(np.unique(c)) == 1:
            rff[i, :] = rff[:, i] = 0.0
            rc[i] = 0.0
    return SuTables(rc, rff)


@dataclass
class SelectionReport:
    features: List[int] = field(default_factory=list)
    scores: List[float] = field(default_factory=list)
    stop_reason: str = ""
    params: Optional[Tuple[float, float]] = None  # (C, gamma) for the wrapper

    @property
    def score(self) -> float:
        return self.scores[-1] if self.scores else 0.0

    def write_csv(self, path, descriptions: Optional[Sequence[str]] = None) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            head = ["step", "feature_index", "feature_description", "score"]
            if self.params is not None:
                head += ["c", "gamma"]
            w.writerow(head)
            for step, (f, s) in enumerate(zip(self.features, self.scores), 1):
                desc = descriptions[f - 1] if descriptions and f - 1 < len(descriptions) else ""
                row = [step, f, desc, repr(float(s))]
                if self.params is not None:
                    row += [repr(self.params[0]), repr(self.params[1])]
                w.writerow(row)


def _check(X, y) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if len(y) < 2 or not ((y == 1).any() and (y == -1).any()):
        raise ValueError("feature selection needs at least two samples of both classes")
    return X, y


def greedy_forward(score_fn, n_features: int) -> Tuple[List[int], List[float], str]:
    """Add the best-scoring column while the score strictly improves.

    Ties go to the lowest column position.
    """
    chosen: List[int] = []
    scores: List[float] = []
    current = 0.0
    while len(chosen) < n_features:
        best, best_s = None, -math.inf
        for j in range(n_features):
            if j in chosen:
                continue
            s = score_fn(chosen + [j])
            if s > best_s:
                best, best_s = j, s
        if best_s <= current:
            return chosen, scores, "no improvement"
        chosen.append(best)
        scores.append(best_s)
        current = best_s
    return chosen, scores, "all features selected"


def filter_select(X, y, feature_indices: Optional[Sequence[int]] = None) -> SelectionReport:
    X, y = _check(X, y)
    idx = list(feature_indices) if feature_indices is not None else list(range(1, X.shape[1] + 1))
    tables = su_tables(X, y)
    chosen, scores, reason = greedy_forward(tables.merit, X.shape[1])
    return SelectionReport([idx[j] for j in chosen], scores, reason)


def exhaustive_filter(X, y, max_features: int = 15) -> Tuple[List[int], float]:
    """Best merit over every non-empty subset (column positions); small inputs only."""
    X, y = _check(X, y)
    m = X.shape[1]
    if m > max_features:
        raise ValueError(f"exhaustive search limited to {max_features} features")
    tables = su_tables(X, y)
    best, best_s = [], 0.0
    for k in range(1, m + 1):
        for s in itertools.combinations(range(m), k):
            v = tables.merit(s)
            if v > best_s + 1e-15:
                best, best_s = list(s), v
    return best, best_s


def _wrapper_cell(args):
    X, y, folds, C, gamma = args
    params = SvmParams(C=C, gamma=gamma)

    def score(cols):
        return cv_accuracy(X[:, cols], y, folds, params)

    return greedy_forward(score, X.shape[1])


def wrapper_select(
    X,
    y,
    grid: Grid = REDUCED_GRID,
    k: int = 5,
    seed: int = 0,
    feature_indices: Optional[Sequence[int]] = None,
    jobs: int = 1,
) -> SelectionReport:
    """Greedy forward search scored by k-fold SVM accuracy, once per (C, gamma)."""
    X, y = _check(X, y)
    idx = list(feature_indices) if feature_indices is not None else list(range(1, X.shape[1] + 1))
    folds = stratified_kfold(y, k, seed)
    pairs = [(c, g) for c in grid.c_values for g in grid.gamma_values]
    runs = map_cells(_wrapper_cell, [(X, y, folds, c, g) for c, g in pairs], jobs)
    best = None
    for (c, g), (chosen, scores, reason) in zip(pairs, runs):
        s = scores[-1] if scores else 0.0
        log.debug("wrapper C=%g gamma=%g -> %s (%.4f)", c, g, chosen, s)
        # earlier pairs win ties: smaller C, then smaller gamma
        if best is None or s > best[0]:
            best = (s, chosen, scores, reason, (c, g))
    _, chosen, scores, reason, params = best
    return SelectionReport([idx[j] for j in chosen], scores, reason, params)


def accuracy_curve(
    X,
    y,
    ordered: Sequence[int],
    grid: Grid = REDUCED_GRID,
    k: int = 5,
    seed: int = 0,
    test: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    jobs: int = 1,
) -> List[Tuple[int, float, Optional[float]]]:
    """(prefix size, CV accuracy, test accuracy) for each prefix of ``ordered``.

    ``ordered`` holds column positions into ``X``. Each prefix gets its own
    grid search; the CV accuracy is the mean fold accuracy of the chosen cell.
    Test accuracy is None unless a held-out ``(X_test, y_test)`` is given.
    """
    from .model_selection import evaluate, fit_model, grid_search

    if not ordered:
        raise ValueError("empty feature ordering")
    X, y = _check(X, y)
    out = []
    for n in range(1, len(ordered) + 1):
        cols = list(ordered[:n])
        report = grid_search(X[:, cols], y, grid, k, seed, jobs=jobs)
        test_acc = None
        if test is not None:
            gamma, C = report.best
            model = fit_model(X[:, cols], y, SvmParams(C=C, gamma=gamma))
            test_acc = evaluate(model, test[0][:, cols], test[1])[1]
        out.append((n, report.mean_accuracy[report.best], test_acc))
    return out
