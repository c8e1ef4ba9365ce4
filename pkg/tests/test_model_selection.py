import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gbcad.model_selection import (
    FULL_GRID,
    REDUCED_GRID,
    Grid,
    apply_standardizer,
    evaluate,
    fit_model,
    fit_standardizer,
    grid_search,
    stratified_kfold,
    stratified_split,
)
from gbcad.svm import SvmModel, SvmParams, accuracy, mcc


def labels(pos, neg, seed=0):
    y = np.array([1] * pos + [-1] * neg)
    return y[np.random.default_rng(seed).permutation(len(y))]


def test_standardizer_examples():
    s = fit_standardizer([[0.0], [2.0]])
    assert s.mean.tolist() == [1.0] and s.scale.tolist() == [1.0]
    assert apply_standardizer(s, [[0.0], [2.0]]).ravel().tolist() == [-1.0, 1.0]
    assert apply_standardizer(s, [[4.0]]).ravel().tolist() == [3.0]
    c = fit_standardizer([[5.0], [5.0], [5.0]])
    assert c.scale.tolist() == [1.0]
    assert apply_standardizer(c, [[5.0], [5.0]]).ravel().tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        fit_standardizer(np.zeros((0, 3)))


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@given(arrays(float, st.tuples(st.integers(2, 20), st.integers(1, 4)), elements=finite))
@settings(max_examples=80)
def test_standardizer_properties(X):
    s = fit_standardizer(X)
    Z = s.transform(X)
    assert np.all(s.scale > 0)
    assert np.allclose(Z.mean(axis=0), 0, atol=1e-9)
    var = Z.var(axis=0)
    assert np.all(np.isclose(var, 1, atol=1e-9) | np.isclose(var, 0, atol=1e-9))
    again = fit_standardizer(Z).transform(Z)
    assert np.allclose(again, Z, atol=1e-12, rtol=0) or np.allclose(again, Z, atol=1e-9)


def test_standardizer_refit_identity_tight():
    X = np.random.default_rng(0).normal(size=(200, 5)) * [1, 10, 100, 0.1, 3] + 7
    Z = fit_standardizer(X).transform(X)
    assert np.abs(fit_standardizer(Z).transform(Z) - Z).max() <= 1e-12


def test_stratified_split_counts():
    y = np.array([1] * 797 + [-1] * 265)
    tr, te = stratified_split(y, 0.8, seed=0)
    assert (len(tr), len(te)) == (849, 213)
    assert sorted(np.concatenate([tr, te]).tolist()) == list(range(1062))
    # within one of the exact proportion per class
    assert abs(np.sum(y[te] == 1) - 0.2 * 797) < 1
    assert abs(np.sum(y[te] == -1) - 0.2 * 265) < 1


def test_stratified_split_small():
    y = labels(5, 5)
    tr, te = stratified_split(y, 0.8, seed=3)
    assert np.sum(y[tr] == 1) == 4 and np.sum(y[tr] == -1) == 4
    assert np.sum(y[te] == 1) == 1 and np.sum(y[te] == -1) == 1


def test_stratified_split_seeding():
    y = labels(60, 40)
    a = stratified_split(y, 0.8, 1)
    b = stratified_split(y, 0.8, 1)
    c = stratified_split(y, 0.8, 2)
    assert all(np.array_equal(u, v) for u, v in zip(a, b))
    assert not np.array_equal(a[1], c[1])
    assert np.sum(y[a[1]] == 1) == np.sum(y[c[1]] == 1)


def test_stratified_split_errors():
    with pytest.raises(ValueError):
        stratified_split(np.ones(10, dtype=int), 0.8, 0)
    with pytest.raises(ValueError):
        stratified_split(labels(5, 5), 1.0, 0)


def test_kfold_small():
    y = labels(5, 5)
    folds = stratified_kfold(y, 5, 0)
    for f in folds:
        assert sorted(y[f].tolist()) == [-1, 1]


def test_kfold_sizes_for_849_rows():
    y = np.array([1] * 637 + [-1] * 212)
    folds = stratified_kfold(y, 5, 0)
    assert sorted(len(f) for f in folds) == [169, 170, 170, 170, 170]
    for c in (1, -1):
        sizes = [int(np.sum(y[f] == c)) for f in folds]
        assert max(sizes) - min(sizes) <= 1


@given(st.integers(5, 60), st.integers(5, 60), st.integers(2, 5), st.integers(0, 99))
def test_kfold_partition(pos, neg, k, seed):
    y = labels(pos, neg, seed)
    folds = stratified_kfold(y, k, seed)
    allidx = np.concatenate(folds)
    assert sorted(allidx.tolist()) == list(range(len(y)))
    for c in (1, -1):
        sizes = [int(np.sum(y[f] == c)) for f in folds]
        assert max(sizes) - min(sizes) <= 1


def test_kfold_errors():
    with pytest.raises(ValueError):
        stratified_kfold(labels(3, 10), 5, 0)
    with pytest.raises(ValueError):
        stratified_kfold(labels(10, 10), 1, 0)


def test_grid_sizes():
    assert len(FULL_GRID) == 19 * 21 == 399
    assert FULL_GRID.gamma_values[0] == 2.0**-15 and FULL_GRID.gamma_values[-1] == 2.0**3
    assert FULL_GRID.c_values[0] == 2.0**-5 and FULL_GRID.c_values[-1] == 2.0**15
    assert len(REDUCED_GRID) == 36
    with pytest.raises(ValueError):
        Grid((), (1.0,))


def _separable_by_one(n=500, seed=0):
    rng = np.random.default_rng(seed)
    # feature 2 decides the class and keeps a gap around 0, like a log-ratio
    # feature that is either 0 or at least log2(k / (k - 1))
    X = rng.normal(size=(n, 4))
    y = np.where(rng.random(n) < 0.75, 1, -1)
    X[:, 2] = y * rng.uniform(0.3, 2.0, size=n)
    return X, y


def test_grid_search_single_cell():
    X, y = _separable_by_one(80)
    r = grid_search(X, y, Grid((0.5,), (2.0,)), k=5, seed=0)
    assert r.best == (0.5, 2.0)
    assert len(r.folds) == 5


def test_grid_search_reaches_perfect_mcc():
    X, y = _separable_by_one(500)
    grid = Grid((2.0**-6, 2.0**-2), (2.0**2, 2.0**8))
    r = grid_search(X, y, grid, k=5, seed=0)
    assert max(r.mean_mcc.values()) == 1.0


def test_grid_search_tie_break_prefers_small_c_then_gamma():
    X, y = _separable_by_one(60)
    X = np.column_stack([np.sign(X[:, 2]) * 5, np.zeros(60)])  # every cell is perfect
    r = grid_search(X, y, Grid((0.5, 0.25), (8.0, 2.0, 4.0)), k=3, seed=0)
    assert set(r.mean_mcc.values()) == {1.0}
    assert r.best == (0.25, 2.0)


def test_grid_search_deterministic_across_jobs():
    X, y = _separable_by_one(120, seed=3)
    X[:, 2] += np.random.default_rng(1).normal(scale=0.7, size=120)  # some noise
    grid = Grid((0.1, 1.0), (1.0, 10.0))
    a = grid_search(X, y, grid, k=4, seed=5, jobs=1)
    b = grid_search(X, y, grid, k=4, seed=5, jobs=3)
    assert a.mean_mcc == b.mean_mcc and a.best == b.best
    assert [(f.gamma, f.c, f.fold, f.counts) for f in a.folds] == [(f.gamma, f.c, f.fold, f.counts) for f in b.folds]


def test_cv_report_csv(tmp_path):
    X, y = _separable_by_one(60)
    r = grid_search(X, y, Grid((0.5,), (1.0, 2.0)), k=3, seed=0)
    path = tmp_path / "cv.csv"
    r.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "gamma,c,fold,tp,fp,tn,fn,mcc,accuracy"
    assert len(lines) == 1 + 2 * 3


def test_cv_does_not_leak(monkeypatch):
    """Perturbing a held-out row never changes that fold's standardizer."""
    import gbcad.model_selection as ms

    X, y = _separable_by_one(50)
    folds = stratified_kfold(y, 5, 0)
    seen = []
    real = ms.fit_standardizer
    monkeypatch.setattr(ms, "fit_standardizer", lambda Z: seen.append(real(Z).mean.copy()) or real(Z))
    grid_search(X, y, Grid((0.5,), (1.0,)), k=5, seed=0)
    first = list(seen)
    seen.clear()
    X2 = X.copy()
    X2[folds[0][0]] += 1000.0
    grid_search(X2, y, Grid((0.5,), (1.0,)), k=5, seed=0)
    assert np.array_equal(first[0], seen[0])
    assert not np.array_equal(first[1], seen[1])


def test_evaluate_examples():
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    y = np.array([-1, -1, 1, 1])
    model = fit_model(X, y, SvmParams(C=10, gamma=0.5))
    counts, acc, m = evaluate(model, X, y)
    assert acc == 1 and m == 1
    always = SvmModel(np.zeros((0, 1)), np.zeros(0), 1.0, SvmParams())
    yt = np.array([1, 1, 1, -1] * 5)
    counts, acc, _ = evaluate(always, np.zeros((20, 1)), yt)
    assert acc == 0.75 and counts.fp == 5
    flipped = SvmModel(model.support_vectors, -model.dual_coefs, -model.bias, model.params, model.standardizer)
    assert evaluate(flipped, X, y)[2] == -1
    with pytest.raises(ValueError):
        evaluate(model, np.zeros((0, 1)), np.zeros(0))
