"""Principal component analysis fitted through the SVD of the centered data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Fitted principal subspace.

    Attributes
    ----------
    mean : ndarray, shape (d,)
        Mean of the training vectors.
    components : ndarray, shape (K_max, d)
        Orthonormal principal axes, rows ordered by decreasing variance.
    eigenvalues : ndarray, shape (K_max,)
        Variance along each axis, 1/(M-1) convention.
    """

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray

    @property
    def k_max(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def _fix_signs(components: np.ndarray) -> np.ndarray:
    # flip each axis so its largest-magnitude entry is positive
    idx = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(len(components)), idx])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def pca_fit(features) -> PcaModel:
    """Fit PCA on an (M, d) array of training vectors, M >= 2.

    The covariance matrix is never formed: the axes are the right singular
    vectors of the centered data and the eigenvalues are the squared singular
    values divided by M - 1. At most ``min(d, M - 1)`` axes are kept.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected an (M, d) array, got shape {X.shape}")
    M, d = X.shape
    if M < 2:
        raise ValueError(f"PCA needs at least 2 vectors, got {M}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    mean = X.mean(axis=0)
    Z = X - mean
    k_max = min(d, M - 1)
    _, s, vt = np.linalg.svd(Z, full_matrices=False)
    eigenvalues = s[:k_max] ** 2 / (M - 1)
    eigenvalues[eigenvalues < 0] = 0.0
    return PcaModel(mean, _fix_signs(vt[:k_max]), eigenvalues)


def _check_k(model: PcaModel, K: int) -> None:
    if not 1 <= K <= model.k_max:
        raise ValueError(f"K={K} outside [1, {model.k_max}]")


def pca_project(model: PcaModel, x, K: int) -> np.ndarray:
    """Coordinates of ``x - mean`` on the first ``K`` axes.

    ``x`` may be a single vector of length d or an (N, d) array.
    """
    _check_k(model, K)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.dim:
        raise ValueError(f"vector dimension {x.shape[-1]} does not match model dimension {model.dim}")
    return (x - model.mean) @ model.components[:K].T


def pca_reconstruct(model: PcaModel, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    return model.mean + z @ model.components[: z.shape[-1]]


def retained_variance(model: PcaModel, K: int) -> float:
    """Fraction of the total eigenvalue mass carried by the first ``K`` axes.

    A model with an all-zero spectrum retains everything by definition.
    """
    _check_k(model, K)
    total = float(np.sum(model.eigenvalues))
    if total <= 0.0:
        return 1.0
    return float(np.sum(model.eigenvalues[:K]) / total)
