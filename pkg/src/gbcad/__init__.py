"""Predict whether Groebner-basis preconditioning shrinks a CAD."""

from .features import Decision, FeatureVector, Problem, full_features, tnoi, tnoi_decision
from .groebner import GroebnerBasis, buchberger, is_groebner_basis, normalize, reduce, s_polynomial
from .polynomial import Polynomial, VariableOrder, format_polynomial, parse_polynomial

__version__ = "0.1.0"
