"""Minimum-distance matching and one-vs-one linear SVM."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


@dataclass(frozen=True, eq=False)
class GalleryIndex:
    """Enrolled templates for Euclidean nearest-neighbor matching."""

    vectors: np.ndarray  # (N, K)
    labels: np.ndarray  # (N,)
    sample_ids: np.ndarray  # (N,)

    @classmethod
    def build(cls, vectors, labels, sample_ids=None) -> "GalleryIndex":
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        labels = np.asarray(labels)
        if sample_ids is None:
            sample_ids = np.arange(len(vectors))
        sample_ids = np.asarray(sample_ids)
        if not len(vectors) == len(labels) == len(sample_ids):
            raise ValueError("vectors, labels and sample ids differ in length")
        return cls(vectors, labels, sample_ids)

    def __len__(self):
        return len(self.vectors)


def _sq_distances(vectors: np.ndarray, query: np.ndarray) -> np.ndarray:
    # explicit differences keep duplicated templates at bit-identical distances
    diff = vectors - query
    return np.einsum("ij,ij->i", diff, diff)


def nn_predict(gallery: GalleryIndex, query) -> tuple:
    """Label, distance and sample id of the closest template.

    Equal distances resolve to the lowest sample id.
    """
    if len(gallery) == 0:
        raise ValueError("gallery is empty")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != gallery.vectors.shape[1:]:
        raise ValueError(
            f"query dimension {query.shape} does not match gallery {gallery.vectors.shape[1:]}"
        )
    d2 = _sq_distances(gallery.vectors, query)
    ties = np.flatnonzero(d2 == d2.min())
    best = ties[np.argmin(gallery.sample_ids[ties])]
    return gallery.labels[best], float(np.sqrt(d2[best])), gallery.sample_ids[best]


def nn_predict_many(gallery: GalleryIndex, queries) -> np.ndarray:
    return np.array([nn_predict(gallery, q)[0] for q in np.atleast_2d(queries)])


# -- binary soft-margin SVM ------------------------------------------------


def augment(X) -> np.ndarray:
    """Append the constant coordinate that carries the bias."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.hstack([X, np.ones((X.shape[0], 1))])


@dataclass
class DualResult:
    w: np.ndarray
    alpha: np.ndarray
    passes: int
    violation: float
    converged: bool


def solve_dual(Xa: np.ndarray, y: np.ndarray, C: float = 1.0, tol: float = 1e-4,
               max_passes: int = 10000, seed: int = 0) -> DualResult:
    """Dual coordinate descent for the hinge-loss SVM without equality constraint.

    Minimizes ``0.5 a'Qa - sum(a)`` over ``0 <= a <= C`` with
    ``Q_ij = y_i y_j x_i.x_j``, keeping ``w = sum a_i y_i x_i`` in sync. A pass
    visits every coordinate once in a seeded random order; the loop stops once
    the largest projected-gradient magnitude at the current iterate is at most
    ``tol``.
    """
    n = Xa.shape[0]
    Z = Xa * y[:, None]
    qdiag = np.einsum("ij,ij->i", Z, Z)
    # visit order depends only on the points, not on which side is positive
    canonical = np.lexsort(Xa.T[::-1])
    rng = np.random.default_rng(seed)
    alpha = np.zeros(n)
    w = np.zeros(Xa.shape[1])
    violation = np.inf
    passes = 0
    while passes < max_passes:
        passes += 1
        violation = 0.0
        for i in canonical[rng.permutation(n)]:
            g = Z[i] @ w - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= C:
                pg = max(g, 0.0)
            else:
                pg = g
            violation = max(violation, abs(pg))
            if pg != 0.0 and qdiag[i] > 0.0:
                new = min(max(a - g / qdiag[i], 0.0), C)
                if new != a:
                    w += (new - a) * Z[i]
                    alpha[i] = new
        if violation <= tol:
            # later updates in the pass may have disturbed earlier coordinates
            violation = _max_violation(Z @ w - 1.0, alpha, C)
            if violation <= tol:
                break
    return DualResult(w, alpha, passes, float(violation), violation <= tol)


def _max_violation(grad, alpha, C) -> float:
    pg = np.where(alpha <= 0.0, np.minimum(grad, 0.0),
                  np.where(alpha >= C, np.maximum(grad, 0.0), grad))
    return float(np.max(np.abs(pg)))


def svm_train_binary(pos, neg, C: float = 1.0, tol: float = 1e-4,
                     max_passes: int = 10000, seed: int = 0) -> np.ndarray:
    """Weight vector (bias last) separating ``pos`` (+1) from ``neg`` (-1)."""
    pos = np.atleast_2d(np.asarray(pos, dtype=np.float64))
    neg = np.atleast_2d(np.asarray(neg, dtype=np.float64))
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both classes need at least one sample")
    if pos.shape[1] != neg.shape[1]:
        raise ValueError(f"dimension mismatch: {pos.shape[1]} vs {neg.shape[1]}")
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(neg))):
        raise ValueError("training vectors contain non-finite values")
    if C <= 0 or tol <= 0:
        raise ValueError("C and tol must be positive")
    Xa = augment(np.vstack([pos, neg]))
    y = np.concatenate([np.ones(len(pos)), -np.ones(len(neg))])
    return solve_dual(Xa, y, C, tol, max_passes, seed).w


def primal_objective(w, Xa, y, C) -> float:
    margins = y * (Xa @ w)
    return 0.5 * float(w @ w) + C * float(np.sum(np.maximum(0.0, 1.0 - margins)))


def dual_objective(alpha, Xa, y) -> float:
    """Dual value to be maximized: ``sum(a) - 0.5 ||sum a_i y_i x_i||^2``."""
    w = (alpha * y) @ Xa
    return float(np.sum(alpha)) - 0.5 * float(w @ w)


# -- one-vs-one multiclass -------------------------------------------------


@dataclass(frozen=True, eq=False)
class SvmModel:
    classes: np.ndarray
    pairs: list  # (class_a, class_b, w); w > 0 votes for class_a
    C: float = 1.0
    tol: float = 1e-4
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        stacked = np.array([w for _, _, w in self.pairs]) if self.pairs else np.empty((0, 0))
        object.__setattr__(self, "weights", stacked)


def svm_train(X, labels, C: float = 1.0, tol: float = 1e-4,
              max_passes: int = 10000, seed: int = 0) -> SvmModel:
    """Train one binary classifier per unordered pair of classes."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    by_class = {c: X[labels == c] for c in classes}
    pairs = []
    for a, b in combinations(classes, 2):
        w = svm_train_binary(by_class[a], by_class[b], C, tol, max_passes, seed)
        pairs.append((a, b, w))
    return SvmModel(classes, pairs, C, tol)


def svm_decision(model: SvmModel, queries) -> np.ndarray:
    """Pairwise decision values, shape (N, n_pairs)."""
    Q = augment(queries)
    if Q.shape[1] != model.weights.shape[1]:
        raise ValueError(
            f"query dimension {Q.shape[1] - 1} does not match model {model.weights.shape[1] - 1}"
        )
    return Q @ model.weights.T


def _vote(model: SvmModel, margins: np.ndarray):
    n = len(model.classes)
    index = {c: i for i, c in enumerate(model.classes)}
    votes = np.zeros(n, dtype=int)
    strength = np.zeros(n)
    for (a, b, _), value in zip(model.pairs, margins):
        # classes are sorted and a < b, so a zero decision value favors the lower id
        winner = index[a] if value >= 0 else index[b]
        votes[winner] += 1
        strength[winner] += abs(value)
    top = np.flatnonzero(votes == votes.max())
    top = top[strength[top] == strength[top].max()]
    return model.classes[top.min()], votes


def svm_predict(model: SvmModel, query):
    """Majority vote over pair classifiers.

    Returns ``(label, votes, margins)``: ``votes`` counts wins per class in
    ``model.classes`` order and ``margins`` holds each pair's decision value.
    Vote ties go to the larger summed winning margin, then the lowest class.
    """
    if not model.pairs:
        raise ValueError("SVM model has no classifiers")
    margins = svm_decision(model, np.asarray(query, dtype=np.float64)[None])[0]
    label, votes = _vote(model, margins)
    return label, votes, margins


def svm_predict_many(model: SvmModel, queries) -> np.ndarray:
    if not model.pairs:
        raise ValueError("SVM model has no classifiers")
    margins = svm_decision(model, queries)
    return np.array([_vote(model, row)[0] for row in margins])
