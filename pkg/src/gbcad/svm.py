"""Soft-margin RBF support vector machine trained by SMO, and MCC/accuracy."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
_TAU = 1e-12
_FULL_KERNEL_LIMIT = 2000


class SvmError(ValueError):
    pass


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    gamma: float = 1.0
    kkt_tolerance: float = 1e-3
    # one pass is n working-set updates; None means 10 * n passes
    max_passes: Optional[int] = None

    def __post_init__(self):
        if not self.C > 0:
            raise SvmError(f"C must be positive, got {self.C}")
        if not self.gamma > 0:
            raise SvmError(f"gamma must be positive, got {self.gamma}")
        if not self.kkt_tolerance > 0:
            raise SvmError("kkt_tolerance must be positive")
        if self.max_passes is not None and self.max_passes < 1:
            raise SvmError("max_passes must be positive")


def rbf_kernel(x, x2, gamma: float) -> float:
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape:
        raise SvmError(f"dimension mismatch {x.shape} vs {x2.shape}")
    if gamma < 0:
        raise SvmError("gamma must be non-negative")
    d = x - x2
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_matrix(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


class _KernelColumns:
    def __init__(self, X: np.ndarray, gamma: float):
        self.X = X
        self.gamma = gamma
        self.full = rbf_matrix(X, X, gamma) if len(X) <= _FULL_KERNEL_LIMIT else None
        self.cache = {}

    def __call__(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[:, i]
        col = self.cache.get(i)
        if col is None:
            if len(self.cache) > 512:
                self.cache.clear()
            col = rbf_matrix(self.X, self.X[i : i + 1], self.gamma)[:, 0]
            self.cache[i] = col
        return col


@dataclass
class DualSolution:
    alpha: np.ndarray
    bias: float
    iterations: int
    converged: bool


def solve_dual(K, y: np.ndarray, C: float, tol: float, max_iter: int) -> DualSolution:
    """SMO on  min 1/2 a'Qa - e'a,  0 <= a <= C,  y'a = 0.

    ``K`` is either an n x n array or a callable returning kernel column i.
    Working pair: maximal violating ``i`` and second-order ``j``.
    """
    col = (lambda i: K[:, i]) if isinstance(K, np.ndarray) else K
    y = np.asarray(y, dtype=float)
    n = len(y)
    alpha = np.zeros(n)
    # v = -y * gradient; a step of size lam on (i, j) changes it by -lam * (K_i - K_j)
    v = y.copy()
    diag = np.array([col(i)[i] for i in range(n)]) if not isinstance(K, np.ndarray) else np.diag(K).copy()
    pos = y > 0
    up = np.ones(n, dtype=bool)  # alpha < C for y = +1, alpha > 0 for y = -1
    low = np.ones(n, dtype=bool)  # alpha > 0 for y = +1, alpha < C for y = -1
    up[~pos] = False
    low[pos] = False
    vu = np.empty(n)
    vl = np.empty(n)
    it = 0
    converged = False
    while it < max_iter:
        np.copyto(vu, v)
        vu[~up] = -np.inf
        i = int(np.argmax(vu))
        m = vu[i]
        np.copyto(vl, v)
        vl[~low] = np.inf
        M = vl.min()
        if m == -np.inf or M == np.inf or m - M < tol:
            converged = True
            break
        Ki = col(i)
        b = m - v
        a = diag[i] + diag - 2.0 * Ki
        a[a <= 0] = _TAU
        score = b * b / a
        score[~low | (b <= 0)] = -np.inf
        j = int(np.argmax(score))
        Kj = col(j)
        lam = b[j] / a[j]
        lam = min(lam, C - alpha[i] if pos[i] else alpha[i])
        lam = min(lam, alpha[j] if pos[j] else C - alpha[j])
        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        for t in (i, j):
            # clip rounding residue onto the box
            if alpha[t] < 1e-14 * C:
                alpha[t] = 0.0
            elif alpha[t] > C * (1 - 1e-14):
                alpha[t] = C
            up[t] = alpha[t] < C if pos[t] else alpha[t] > 0
            low[t] = alpha[t] > 0 if pos[t] else alpha[t] < C
        v -= lam * (Ki - Kj)
        it += 1

    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(np.mean(v[free]))
    else:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        hi = np.max(v[up]) if up.any() else np.max(v)
        lo = np.min(v[low]) if low.any() else np.min(v)
        bias = float((hi + lo) / 2)
    return DualSolution(alpha, bias, it, converged)


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """W(a) = sum a - 1/2 sum a_i a_j y_i y_j K_ij (to be maximised)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    params: SvmParams
    standardizer: Optional[object] = None
    feature_indices: List[int] = field(default_factory=list)
    converged: bool = True

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    def _prepare(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise SvmError(f"expected {self.dim} features, got {X.shape[1]}")
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        return X

    def decision_values(self, X) -> np.ndarray:
        X = self._prepare(X)
        if len(self.dual_coefs) == 0:
            return np.full(len(X), self.bias)
        return rbf_matrix(X, self.support_vectors, self.params.gamma) @ self.dual_coefs + self.bias

    def decision_value(self, x) -> float:
        return float(self.decision_values(x)[0])

    def predict_many(self, X) -> np.ndarray:
        return np.where(self.decision_values(X) >= 0, 1, -1)

    def predict(self, x) -> int:
        return int(self.predict_many(x)[0])

    def to_dict(self) -> dict:
        s = self.standardizer
        return {
            "format_version": FORMAT_VERSION,
            "params": {
                "C": self.params.C,
                "gamma": self.params.gamma,
                "kkt_tolerance": self.params.kkt_tolerance,
                "max_passes": self.params.max_passes,
            },
            "feature_indices": list(self.feature_indices),
            "standardizer": None if s is None else {"mean": s.mean.tolist(), "scale": s.scale.tolist()},
            "support_vectors": self.support_vectors.tolist(),
            "dual_coefs": self.dual_coefs.tolist(),
            "bias": self.bias,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        from .model_selection import Standardizer

        if d.get("format_version") != FORMAT_VERSION:
            raise SvmError(f"unsupported model format {d.get('format_version')!r}")
        s = d.get("standardizer")
        sv = np.array(d["support_vectors"], dtype=float)
        if sv.size == 0:
            sv = sv.reshape(0, len(d["feature_indices"]))
        return cls(
            support_vectors=sv,
            dual_coefs=np.array(d["dual_coefs"], dtype=float),
            bias=float(d["bias"]),
            params=SvmParams(**d["params"]),
            standardizer=None if s is None else Standardizer(np.array(s["mean"]), np.array(s["scale"])),
            feature_indices=list(d["feature_indices"]),
            converged=bool(d.get("converged", True)),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SvmModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _check_training_data(X, y) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y)
    if len(X) != len(y):
        raise SvmError("feature/label length mismatch")
    if not np.all(np.isfinite(X)):
        raise SvmError("non-finite feature value")
    if not set(np.unique(y)) <= {-1, 1}:
        raise SvmError("labels must be +1/-1")
    if not ((y == 1).any() and (y == -1).any()):
        raise SvmError("training data must contain both classes")
    return X, y.astype(float)


def train_dual(X, y, params: SvmParams) -> Tuple[DualSolution, np.ndarray, np.ndarray]:
    X, y = _check_training_data(X, y)
    n = len(y)
    passes = params.max_passes if params.max_passes is not None else 10 * n
    sol = solve_dual(_KernelColumns(X, params.gamma), y, params.C, params.kkt_tolerance, passes * n)
    if not sol.converged:
        log.warning("SMO stopped after %d iterations without meeting tolerance %g", sol.iterations, params.kkt_tolerance)
    return sol, X, y


def train(X, y, params: SvmParams, feature_indices: Sequence[int] = (), standardizer=None) -> SvmModel:
    """Fit on ``X`` (already standardized if ``standardizer`` is given)."""
    sol, X, y = train_dual(X, y, params)
    sv = sol.alpha > 0
    return SvmModel(
        support_vectors=X[sv].copy(),
        dual_coefs=(sol.alpha * y)[sv],
        bias=sol.bias,
        params=params,
        standardizer=standardizer,
        feature_indices=list(feature_indices) or list(range(1, X.shape[1] + 1)),
        converged=sol.converged,
    )


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


def confusion(y_true, y_pred) -> ConfusionCounts:
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    return ConfusionCounts(
        tp=int(np.sum((t == 1) & (p == 1))),
        fp=int(np.sum((t == -1) & (p == 1))),
        tn=int(np.sum((t == -1) & (p == -1))),
        fn=int(np.sum((t == 1) & (p == -1))),
    )


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation; a zero factor in the denominator makes it 1."""
    num = c.tp * c.tn - c.fp * c.fn
    den = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    return num / (math.sqrt(den) if den else 1.0)


def accuracy(c: ConfusionCounts) -> float:
    if c.total == 0:
        raise SvmError("accuracy of an empty evaluation")
    return (c.tp + c.tn) / c.total
