"""Kernel PCA: project features to a low-dimensional coordinate system."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from distortion_lens.kernels import KernelParams, center_kernel, center_kernel_cross, rbf_kernel_matrix

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class KpcaModel:
    training_features: np.ndarray
    params: KernelParams
    eigenvalues: np.ndarray          # top-d, non-increasing, clamped >= 0
    projection_coefficients: np.ndarray  # N x d, eigenvectors scaled by 1/sqrt(eigenvalue)
    d: int
    train_gram: np.ndarray           # uncentered N x N Gram, needed for cross-centering
    training_coordinates: np.ndarray  # N x d projections of the training set


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry positive, for reproducibility."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        pivot = np.argmax(np.abs(out[:, j]))
        if out[pivot, j] < 0:
            out[:, j] = -out[:, j]
    return out


def fit_kpca(X: np.ndarray, params: KernelParams, d: int) -> KpcaModel:
    """Eigendecompose the centered RBF Gram matrix and keep the top d components.

    Rank-deficient dimensions (eigenvalue below 1e-10 * lambda_max) are zeroed
    and reported via a warning rather than an error.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not (1 <= d <= n - 1):
        raise ValueError(f"need 1 <= d <= N-1, got d={d} with N={n}")
    K = rbf_kernel_matrix(X, X, params)
    Kc = center_kernel(K)
    eigvals, eigvecs = np.linalg.eigh(Kc)
    order = np.argsort(eigvals)[::-1][:d]
    lam = eigvals[order]
    vec = _fix_signs(eigvecs[:, order])
    lam_max = max(lam[0], 0.0)
    usable = lam > _RANK_TOL * lam_max if lam_max > 0 else np.zeros(d, dtype=bool)
    if usable.sum() < d:
        warnings.warn(
            f"kPCA rank deficiency: only {int(usable.sum())} of {d} requested components "
            "have significant eigenvalues; remaining dimensions zeroed",
            stacklevel=2,
        )
    lam = np.clip(lam, 0.0, None)
    coeffs = np.zeros((n, d))
    coeffs[:, usable] = vec[:, usable] / np.sqrt(lam[usable])
    coords = Kc @ coeffs
    return KpcaModel(
        training_features=X,
        params=params,
        eigenvalues=lam,
        projection_coefficients=coeffs,
        d=d,
        train_gram=K,
        training_coordinates=coords,
    )


def transform(model: KpcaModel, X_new: np.ndarray) -> np.ndarray:
    """Project new points into the fitted kPCA coordinate system."""
    X_new = np.asarray(X_new, dtype=np.float64)
    if X_new.shape[1] != model.training_features.shape[1]:
        raise ValueError(
            f"dimension mismatch: model fitted on {model.training_features.shape[1]} columns, "
            f"got {X_new.shape[1]}"
        )
    K_cross = rbf_kernel_matrix(X_new, model.training_features, model.params)
    Kc = center_kernel_cross(K_cross, model.train_gram)
    return Kc @ model.projection_coefficients
