import math
import random

import pytest
from hypothesis import HealthCheck, given, settings

from gbcad.features import (
    Decision,
    FeatureVector,
    Problem,
    ProblemError,
    after_features,
    before_features,
    feature_names,
    full_features,
    set_features,
    stds,
    subset_features,
    tds,
    tnoi,
    tnoi_decision,
)
from gbcad.groebner import GroebnerBasis, buchberger
from gbcad.polynomial import DEFAULT_ORDER, Polynomial, VariableOrder, parse_polynomial

from conftest import E_TEXT, F_TEXT, WORKED_FEATURES, P, binomial_systems


def basis_of(polys):
    return GroebnerBasis(tuple(polys), DEFAULT_ORDER)


def test_tnoi_stds_tds(worked_problem, worked_basis_polys):
    EF = worked_problem.equalities + worked_problem.constraints
    GF = tuple(worked_basis_polys) + worked_problem.constraints
    assert tnoi(EF) == 12 and tnoi(GF) == 10 and tnoi([]) == 0
    assert stds(EF) == 12 and tds(EF) == 2
    assert stds(GF) == 10
    assert stds([P("x*y")]) == tds([P("x*y")]) == 2
    with pytest.raises(ProblemError):
        stds([])


def test_before_features_worked(worked_problem):
    assert before_features(worked_problem) == pytest.approx(WORKED_FEATURES[:12], abs=1e-12)


def test_after_features_worked(worked_problem, worked_basis_polys):
    got = after_features(worked_problem, basis_of(worked_basis_polys))
    assert got == pytest.approx(WORKED_FEATURES[12:25], abs=1e-12)


def test_full_features_worked(worked_problem):
    fv = full_features(worked_problem, buchberger(worked_problem.equalities))
    assert len(fv) == 28
    assert fv.values == pytest.approx(WORKED_FEATURES, abs=1e-3)
    assert fv[26] == pytest.approx(math.log2(12 / 10), abs=1e-12)
    assert fv[27] == pytest.approx(math.log2(12 / 10), abs=1e-12)
    assert fv[28] == 0
    assert not fv.degenerate


def test_single_polynomial_counts():
    assert set_features([P("17*x^2 - 6")], DEFAULT_ORDER) == pytest.approx([1, 2, 2, 2, 0, 0, 1, 0, 0, 0.5, 0, 0])


def test_no_z_anywhere():
    prob = Problem([P("x*y + 1"), P("x - 3")], [P("y^2")])
    f = before_features(prob)
    assert f[5] == f[8] == f[11] == 0


def test_inconsistent_system_after_features():
    prob = Problem([P("x"), P("x + 1")], [])
    G = buchberger(prob.equalities)
    assert list(G) == [P("1")]
    assert after_features(prob, G) == [1] + [0] * 12
    fv = full_features(prob, G)
    assert fv.degenerate
    assert fv.values[25:] == [0, 0, 0]


def test_already_reduced_equalities_give_identical_blocks():
    prob = Problem([P("x^2 - 2"), P("y + 3*x")], [P("x*z + 1")])
    G = buchberger(prob.equalities)
    assert set(G) == set(prob.equalities)
    fv = full_features(prob, G)
    assert fv.values[13:25] == fv.values[:12]
    assert fv.values[25:] == [0, 0, 0]


def test_tnoi_decision():
    prob = Problem([P(e) for e in E_TEXT], [P(f) for f in F_TEXT])
    assert tnoi_decision(prob, buchberger(prob.equalities)) is Decision.PRECONDITION
    same = Problem([P("x + y"), P("y - 1")], [])
    # basis {y - 1, x + 1}: TNoI 3 -> 2, so precondition
    assert tnoi_decision(same, buchberger(same.equalities)) is Decision.PRECONDITION
    # equal TNoI must not precondition
    eq = Problem([P("x^2 - 2"), P("y + 3*x")], [])
    assert tnoi_decision(eq, buchberger(eq.equalities)) is Decision.DO_NOT
    # TNoI rising
    up = Problem([P("x*y"), P("z")], [])
    rising = basis_of([P("x*y + z"), P("x*z"), P("y*z + x")])
    assert tnoi(rising.generators) > tnoi(up.equalities)
    assert tnoi_decision(up, rising) is Decision.DO_NOT


def test_subset_features(worked_problem):
    fv = full_features(worked_problem, buchberger(worked_problem.equalities))
    assert subset_features(fv, [14, 9, 22, 4, 12]) == pytest.approx([10, 2 / 3, 1 / 2, 2, 5 / 12])
    assert subset_features(fv, range(1, 29)) == fv.values
    got = subset_features(fv, [14, 13, 2, 26, 21, 15, 23, 19, 25, 27])
    assert got == pytest.approx([10, 6, 12, 0.263, 1 / 2, 10, 1 / 3, 1, 1 / 4, 0.263], abs=1e-3)
    for bad in ([], [0], [29], [3, 3]):
        with pytest.raises(ValueError):
            subset_features(fv, bad)


def test_problem_invariants():
    with pytest.raises(ProblemError):
        Problem([P("x")], [])
    with pytest.raises(ProblemError):
        Problem([P("x"), Polynomial.zero()], [])
    with pytest.raises(ProblemError):
        Problem([P("x"), P("y")], [], label=1, cells_plain=10, cells_gb=10)
    Problem([P("x"), P("y")], [], label=-1, cells_plain=10, cells_gb=10)


def test_feature_names():
    names = feature_names()
    assert len(names) == 28
    assert names[0] == "TNoI before GB"
    assert names[12] == "Number of polynomials after GB"
    assert names[24] == "Proportion of monomials with z after GB"


def _ranges(fv):
    v = fv.values
    for i in list(range(6, 12)) + list(range(19, 25)):
        assert 0 <= v[i] <= 1
    for i in list(range(0, 6)) + list(range(12, 19)):
        assert v[i] >= 0 and v[i] == int(v[i])
    assert v[12] >= 1


def _recount(polys, var):
    polys_with = sum(1 for p in polys if any(m[var] for m in p.terms))
    monos = [m for p in polys for m in p.terms]
    return polys_with / len(polys), sum(1 for m in monos if m[var]) / len(monos)


@given(binomial_systems(size=3), binomial_systems(size=3))
@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_feature_invariants(E, F):
    prob = Problem(E, F)
    G = buchberger(E)
    fv = full_features(prob, G)
    _ranges(fv)
    assert (tnoi_decision(prob, G) is Decision.PRECONDITION) == (fv[26] > 0)
    for var in range(3):
        assert (fv[7 + var], fv[10 + var]) == pytest.approx(_recount(E + F, var))
        assert (fv[20 + var], fv[23 + var]) == pytest.approx(_recount(list(G) + F, var))


def _permute(p, perm, order):
    return Polynomial({tuple(m[i] for i in perm): c for m, c in p.terms.items()}, order)


@given(binomial_systems(size=3), binomial_systems(size=3))
@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_variable_renaming_permutes_per_variable_features(E, F):
    G = buchberger(E)
    perm = (2, 0, 1)  # new position k holds old variable perm[k]
    order = VariableOrder([DEFAULT_ORDER.names[i] for i in perm])
    prob = Problem(E, F)
    prob2 = Problem([_permute(p, perm, order) for p in E], [_permute(p, perm, order) for p in F], order)
    G2 = GroebnerBasis(tuple(_permute(g, perm, order) for g in G), order)
    a = full_features(prob, G).values
    b = full_features(prob2, G2).values
    fixed = [0, 1, 2, 12, 13, 14, 15, 25, 26, 27]
    assert [a[i] for i in fixed] == [b[i] for i in fixed]
    for start in (3, 6, 9, 16, 19, 22):
        assert [b[start + k] for k in range(3)] == [a[start + perm[k]] for k in range(3)]
