"""Algebraic features of a problem before and after Groebner preconditioning."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .groebner import GroebnerBasis
from .polynomial import (
    DEFAULT_ORDER,
    Polynomial,
    VariableOrder,
    contains_variable,
    max_degree_in,
    monomial_count,
    noi,
    total_degree,
)

log = logging.getLogger(__name__)


class ProblemError(ValueError):
    pass


class Decision(str, Enum):
    PRECONDITION = "PRECONDITION"
    DO_NOT = "DO_NOT"


@dataclass(frozen=True)
class Problem:
    """Equalities ``E`` and other polynomials ``F`` of a CAD input."""

    equalities: Tuple[Polynomial, ...]
    constraints: Tuple[Polynomial, ...]
    order: VariableOrder = DEFAULT_ORDER
    label: Optional[int] = None
    cells_plain: Optional[int] = None
    cells_gb: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "equalities", tuple(self.equalities))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.equalities) < 2:
            raise ProblemError("a problem needs at least two equalities")
        for p in self.equalities + self.constraints:
            if p.is_zero():
                raise ProblemError("zero polynomial in problem")
            if p.order != self.order:
                raise ProblemError("polynomial variable order differs from problem order")
        if self.label not in (None, 1, -1):
            raise ProblemError(f"label must be +1 or -1, got {self.label}")
        for c in (self.cells_plain, self.cells_gb):
            if c is not None and c <= 0:
                raise ProblemError("cell counts must be positive")
        if self.label is not None and self.cells_plain is not None and self.cells_gb is not None:
            if self.label != label_from_cells(self.cells_plain, self.cells_gb):
                raise ProblemError("label disagrees with cell counts")


def label_from_cells(cells_plain: int, cells_gb: int) -> int:
    # ties count as not beneficial
    return 1 if cells_gb < cells_plain else -1


@dataclass
class FeatureVector:
    values: List[float]
    label: Optional[int] = None
    degenerate: bool = False
    names: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> float:
        """1-based access, matching the feature table numbering."""
        if not 1 <= index <= len(self.values):
            raise IndexError(index)
        return self.values[index - 1]


def tnoi(polys: Sequence[Polynomial]) -> int:
    return sum(noi(p) for p in polys)


def stds(polys: Sequence[Polynomial]) -> int:
    if not polys:
        raise ProblemError("stds of an empty set")
    return sum(total_degree(p) for p in polys)


def tds(polys: Sequence[Polynomial]) -> int:
    if not polys:
        raise ProblemError("tds of an empty set")
    return max(total_degree(p) for p in polys)


def set_features(polys: Sequence[Polynomial], order: VariableOrder) -> List[float]:
    # TNoI, stds, tds, max degree per var, polynomial share per var, monomial share per var
    n_polys = len(polys)
    n_monos = sum(monomial_count(p) for p in polys)
    out: List[float] = [float(tnoi(polys)), float(stds(polys)), float(tds(polys))]
    names = order.names
    out += [float(max((max_degree_in(p, v) for p in polys), default=0)) for v in names]
    out += [sum(contains_variable(p, v) for p in polys) / n_polys for v in names]
    for i in range(len(names)):
        with_v = sum(1 for p in polys for m in p._terms if m[i])
        out.append(with_v / n_monos if n_monos else 0.0)
    return out


def before_features(problem: Problem) -> List[float]:
    polys = problem.equalities + problem.constraints
    return set_features(polys, problem.order)


def after_set(problem: Problem, gb: GroebnerBasis) -> Tuple[Polynomial, ...]:
    return tuple(gb.generators) + problem.constraints


def after_features(problem: Problem, gb: GroebnerBasis) -> List[float]:
    if len(gb) == 0:
        raise ProblemError("empty Groebner basis")
    polys = after_set(problem, gb)
    return [float(len(polys))] + set_features(polys, problem.order)


def _log_ratio(before: float, after: float) -> Tuple[float, bool]:
    if before <= 0 or after <= 0:
        return 0.0, True
    return math.log2(before) - math.log2(after), False


def feature_names(order: VariableOrder = DEFAULT_ORDER) -> List[str]:
    """Human-readable descriptions, index ``i`` describing feature ``i + 1``."""

    def block(when: str) -> List[str]:
        rows = [f"TNoI {when} GB", f"stds {when} GB", f"tds of polynomials {when} GB"]
        rows += [f"Max degree of {v} in polynomials {when} GB" for v in order.names]
        rows += [f"Proportion of polynomials with {v} {when} GB" for v in order.names]
        rows += [f"Proportion of monomials with {v} {when} GB" for v in order.names]
        return rows

    return (
        block("before")
        + ["Number of polynomials after GB"]
        + block("after")
        + [f"log2({q} before GB) - log2({q} after GB)" for q in ("TNoI", "stds", "tds")]
    )


def feature_count(order: VariableOrder = DEFAULT_ORDER) -> int:
    return 7 + 6 * len(order) + 3


def before_indices(order: VariableOrder = DEFAULT_ORDER) -> List[int]:
    return list(range(1, 4 + 3 * len(order)))


def after_indices(order: VariableOrder = DEFAULT_ORDER) -> List[int]:
    n = 3 + 3 * len(order)
    return list(range(n + 1, 2 * n + 2))


def full_features(problem: Problem, gb: GroebnerBasis) -> FeatureVector:
    before = before_features(problem)
    after = after_features(problem, gb)
    logs = []
    degenerate = False
    for b, a in zip(before[:3], after[1:4]):
        v, bad = _log_ratio(b, a)
        logs.append(v)
        degenerate |= bad
    if degenerate:
        log.warning("zero TNoI/stds/tds in log-ratio feature; set to 0")
    return FeatureVector(before + after + logs, problem.label, degenerate, feature_names(problem.order))


def tnoi_decision(problem: Problem, gb: GroebnerBasis) -> Decision:
    """Precondition only if TNoI strictly decreases."""
    before = tnoi(problem.equalities + problem.constraints)
    after = tnoi(after_set(problem, gb))
    return Decision.PRECONDITION if after < before else Decision.DO_NOT


def check_indices(indices: Sequence[int], n_features: int) -> List[int]:
    indices = [int(i) for i in indices]
    if not indices:
        raise ValueError("feature subset must be non-empty")
    if len(set(indices)) != len(indices):
        raise ValueError(f"duplicate feature index in {indices}")
    bad = [i for i in indices if not 1 <= i <= n_features]
    if bad:
        raise ValueError(f"feature indices out of range 1..{n_features}: {bad}")
    return indices


def subset_features(fv: FeatureVector, indices: Sequence[int]) -> List[float]:
    indices = check_indices(indices, len(fv))
    return [fv[i] for i in indices]
