from fractions import Fraction

import pytest
from hypothesis import strategies as st

from gbcad.features import Problem
from gbcad.polynomial import DEFAULT_ORDER, Polynomial, parse_polynomial

E_TEXT = ["-12*y*z - 3*z", "17*x^2 - 6", "-2*y*z + 5*x"]
F_TEXT = ["-2*y*z - 9*y", "-15*x^2 - 19*y", "6*x*z + 3"]
G_TEXT = ["17*x^2 - 6", "4*y + 1", "z + 10*x"]

# reference feature vector for the worked example; entry 27 follows its
# defining formula log2(12) - log2(10) = 0.263, not 2.263
WORKED_FEATURES = [
    12, 12, 2, 2, 1, 1, 2 / 3, 2 / 3, 2 / 3, 1 / 3, 5 / 12, 5 / 12,
    6, 10, 10, 2, 2, 1, 1, 2 / 3, 1 / 2, 1 / 2, 1 / 3, 1 / 3, 1 / 4,
    0.263, 0.263, 0,
]


def P(text, order=DEFAULT_ORDER):
    return parse_polynomial(text, order)


@pytest.fixture
def worked_problem():
    return Problem([P(s) for s in E_TEXT], [P(s) for s in F_TEXT])


@pytest.fixture
def worked_basis_polys():
    return [P(s) for s in G_TEXT]


coefficients = st.one_of(
    st.integers(-20, 20),
    st.fractions(min_value=-5, max_value=5, max_denominator=7),
).filter(lambda c: c != 0)

monomials = st.tuples(*[st.integers(0, 3)] * 3)


@st.composite
def polynomials(draw, max_terms=4):
    terms = draw(st.dictionaries(monomials, coefficients, max_size=max_terms))
    return Polynomial(terms, DEFAULT_ORDER)


@st.composite
def binomial_systems(draw, size=3, max_degree=3):
    """Small generated-style systems: 1-2 term integer polynomials."""
    out = []
    while len(out) < size:
        terms = draw(
            st.dictionaries(
                st.tuples(*[st.integers(0, max_degree)] * 3).filter(lambda m: sum(m) <= max_degree),
                st.integers(-20, 20).filter(bool),
                min_size=1,
                max_size=2,
            )
        )
        p = Polynomial(terms, DEFAULT_ORDER)
        if not p.is_constant():
            out.append(p)
    return out
