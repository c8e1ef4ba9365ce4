"""Random problem generation, problem files and feature-matrix export."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .features import (
    FeatureVector,
    Problem,
    after_indices,
    before_indices,
    feature_count,
    full_features,
    label_from_cells,
)
from .groebner import GroebnerBasis, buchberger
from .polynomial import (
    DEFAULT_ORDER,
    Polynomial,
    VariableOrder,
    format_polynomial,
    parse_polynomial,
)


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class GenerationProfile:
    order: VariableOrder = DEFAULT_ORDER
    max_terms: int = 2
    coeff_bound: int = 20
    degrees: Tuple[int, ...] = (2, 3, 4)
    polys_per_set: int = 3

    def __post_init__(self):
        if self.max_terms < 1 or self.coeff_bound < 1 or self.polys_per_set < 1:
            raise ValueError("generation bounds must be positive")
        if not self.degrees or min(self.degrees) < 1:
            raise ValueError("degrees must be positive")


@dataclass
class ProblemRecord:
    id: str
    degree: int
    E: List[str]
    F: List[str]
    cells_plain: Optional[int] = None
    cells_gb: Optional[int] = None
    label: Optional[int] = None
    G: Optional[List[str]] = None
    order: Tuple[str, ...] = ("x", "y", "z")

    def variable_order(self) -> VariableOrder:
        return VariableOrder(self.order)

    def problem(self) -> Problem:
        order = self.variable_order()
        return Problem(
            [parse_polynomial(s, order) for s in self.E],
            [parse_polynomial(s, order) for s in self.F],
            order,
            self.label,
            self.cells_plain,
            self.cells_gb,
        )

    def basis(self) -> GroebnerBasis:
        order = self.variable_order()
        if self.G is None:
            return buchberger([parse_polynomial(s, order) for s in self.E])
        return GroebnerBasis(tuple(parse_polynomial(s, order) for s in self.G), order)

    def to_dict(self) -> dict:
        d = {"id": self.id, "degree": self.degree, "E": list(self.E), "F": list(self.F)}
        for key in ("cells_plain", "cells_gb", "label", "G"):
            v = getattr(self, key)
            if v is not None:
                d[key] = v
        if tuple(self.order) != DEFAULT_ORDER.names:
            d["order"] = list(self.order)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ProblemRecord":
        unknown = set(d) - {"id", "degree", "E", "F", "cells_plain", "cells_gb", "label", "G", "order"}
        if unknown:
            raise DatasetError(f"unknown keys {sorted(unknown)}")
        try:
            rec = cls(
                id=str(d["id"]),
                degree=int(d["degree"]),
                E=[str(s) for s in d["E"]],
                F=[str(s) for s in d["F"]],
                cells_plain=d.get("cells_plain"),
                cells_gb=d.get("cells_gb"),
                label=d.get("label"),
                G=d.get("G"),
                order=tuple(d.get("order", DEFAULT_ORDER.names)),
            )
        except KeyError as e:
            raise DatasetError(f"missing key {e}") from None
        rec.problem()  # validate
        return rec


def random_polynomial(profile: GenerationProfile, degree: int, rng: np.random.Generator) -> Polynomial:
    """1..max_terms terms, total degree <= ``degree``, non-constant, non-zero coefficients."""
    n = len(profile.order)
    while True:
        k = int(rng.integers(1, profile.max_terms + 1))
        terms = {}
        for _ in range(k):
            d = int(rng.integers(0, degree + 1))
            mono = _random_monomial(n, d, rng)
            c = 0
            while c == 0:
                c = int(rng.integers(-profile.coeff_bound, profile.coeff_bound + 1))
            terms[mono] = c
        if len(terms) < k:
            continue  # duplicate monomial
        p = Polynomial(terms, profile.order)
        if not p.is_constant():
            return p


def _random_monomial(n: int, d: int, rng: np.random.Generator) -> Tuple[int, ...]:
    # uniform over exponent vectors of total degree exactly d (stars and bars)
    if d == 0:
        return (0,) * n
    bars = np.sort(rng.choice(d + n - 1, size=n - 1, replace=False))
    edges = np.concatenate(([-1], bars, [d + n - 1]))
    return tuple(int(b - a - 1) for a, b in zip(edges[:-1], edges[1:]))


def generate_dataset(n: int, seed: int, profile: GenerationProfile = GenerationProfile()) -> List[ProblemRecord]:
    classes = len(profile.degrees)
    if n <= 0 or n % classes:
        raise DatasetError(f"count {n} must be a positive multiple of {classes}")
    rng = np.random.default_rng([seed, 0])
    records = []
    width = len(str(n))
    for d in profile.degrees:
        for _ in range(n // classes):
            E = [format_polynomial(random_polynomial(profile, d, rng)) for _ in range(profile.polys_per_set)]
            F = [format_polynomial(random_polynomial(profile, d, rng)) for _ in range(profile.polys_per_set)]
            records.append(
                ProblemRecord(f"p{len(records):0{width}d}", d, E, F, order=profile.order.names)
            )
    return records


def attach_labels(records: Sequence[ProblemRecord], counts: Mapping[str, Tuple[int, int]]) -> List[ProblemRecord]:
    by_id = {r.id: r for r in records}
    unknown = [k for k in counts if k not in by_id]
    if unknown:
        raise DatasetError(f"unknown problem ids {unknown[:5]}")
    out = []
    for r in records:
        if r.id in counts:
            plain, gb = counts[r.id]
            if plain <= 0 or gb <= 0:
                raise DatasetError(f"non-positive cell count for {r.id}")
            r = replace(r, cells_plain=int(plain), cells_gb=int(gb), label=label_from_cells(plain, gb))
        out.append(r)
    return out


def label_with(records: Sequence[ProblemRecord], oracle: Callable[[Problem, GroebnerBasis], int]) -> List[ProblemRecord]:
    """Label records with any deterministic function of the problem (pipeline testing)."""
    out = []
    for r in records:
        label = int(oracle(replace(r, label=None, cells_plain=None, cells_gb=None).problem(), r.basis()))
        out.append(replace(r, label=label, cells_plain=None, cells_gb=None))
    return out


def tnoi_drop_oracle(problem: Problem, gb: GroebnerBasis) -> int:
    """+1 iff the TNoI log-ratio feature is positive."""
    tnoi_log_ratio = feature_count(problem.order) - 2
    return 1 if full_features(problem, gb)[tnoi_log_ratio] > 0 else -1


def read_cell_counts(path) -> Dict[str, Tuple[int, int]]:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["id"]] = (int(row["cells_plain"]), int(row["cells_gb"]))
    return out


def write_problems(records: Iterable[ProblemRecord], path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


def read_problems(path) -> List[ProblemRecord]:
    records = []
    seen = set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = ProblemRecord.from_dict(json.loads(line))
            except (ValueError, TypeError) as e:
                raise DatasetError(f"line {lineno}: {e}") from None
            if rec.id in seen:
                raise DatasetError(f"line {lineno}: duplicate id {rec.id!r}")
            seen.add(rec.id)
            records.append(rec)
    return records


FEATURE_SETS = ("before", "after", "all")


def feature_set_indices(name: str, order: VariableOrder = DEFAULT_ORDER) -> List[int]:
    if name == "before":
        return before_indices(order)
    if name == "after":
        return after_indices(order)
    if name == "all":
        return list(range(1, feature_count(order) + 1))
    raise ValueError(f"unknown feature set {name!r}")


def featurize(records: Sequence[ProblemRecord]) -> List[FeatureVector]:
    return [full_features(r.problem(), r.basis()) for r in records]


def _fmt(v: float) -> str:
    return repr(float(v))


def export_features(
    records: Sequence[ProblemRecord],
    path,
    subset: Sequence[int],
    require_labels: bool = True,
    vectors: Optional[Sequence[FeatureVector]] = None,
) -> None:
    """CSV: ``id, f<i>..., label``; one row per problem."""
    if vectors is None:
        vectors = featurize(records)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"f{i}" for i in subset] + ["label"])
        for r, fv in zip(records, vectors):
            if r.label is None and require_labels:
                raise DatasetError(f"record {r.id} is unlabeled")
            w.writerow([r.id] + [_fmt(fv[i]) for i in subset] + ["" if r.label is None else r.label])


@dataclass
class FeatureTable:
    ids: List[str]
    indices: List[int]
    X: np.ndarray
    y: Optional[np.ndarray]

    def select(self, indices: Sequence[int]) -> "FeatureTable":
        pos = {f: k for k, f in enumerate(self.indices)}
        missing = [i for i in indices if i not in pos]
        if missing:
            raise DatasetError(f"features {missing} not present in table")
        cols = [pos[i] for i in indices]
        return FeatureTable(self.ids, list(indices), self.X[:, cols], self.y)

    def rows(self, idx) -> "FeatureTable":
        idx = np.asarray(idx)
        return FeatureTable([self.ids[i] for i in idx], self.indices, self.X[idx], None if self.y is None else self.y[idx])


def read_features(path, require_labels: bool = True) -> FeatureTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty feature file") from None
        if header[0] != "id" or header[-1] != "label":
            raise DatasetError(f"{path}: header must be id, f<i>..., label")
        indices = [int(h[1:]) for h in header[1:-1]]
        ids, rows, labels = [], [], []
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(header):
                raise DatasetError(f"{path}: line {lineno} has {len(row)} fields")
            ids.append(row[0])
            rows.append([float(v) for v in row[1:-1]])
            labels.append(int(row[-1]) if row[-1] else None)
    if not ids:
        raise DatasetError(f"{path}: no rows")
    if any(l is None for l in labels):
        if require_labels:
            raise DatasetError(f"{path}: unlabeled rows")
        y = None
    else:
        y = np.array(labels, dtype=int)
    return FeatureTable(ids, indices, np.array(rows, dtype=float), y)
