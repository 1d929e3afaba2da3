"""RBF kernel machinery shared by the kPCA and SVM paths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class KernelParams:
    """RBF bandwidth; kernel(x, y) = exp(-gamma * ||x - y||^2)."""

    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")


def rbf_kernel_matrix(X: np.ndarray, Y: np.ndarray, params: KernelParams) -> np.ndarray:
    """Dense RBF Gram matrix between the rows of X and Y."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]} columns")
    sq = cdist(X, Y, metric="sqeuclidean")
    K = np.exp(-params.gamma * sq)
    if X is Y or (X.shape == Y.shape and np.shares_memory(X, Y)):
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
    return K


def default_gamma(X: np.ndarray) -> KernelParams:
    """Scale heuristic gamma = 1 / (D * mean per-column population variance)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need an N x D matrix with N >= 2")
    total_variance = float(X.var(axis=0).mean())
    if total_variance <= 0.0:
        raise ValueError("all-constant feature matrix: zero variance, cannot set gamma")
    return KernelParams(gamma=1.0 / (X.shape[1] * total_variance))


def center_kernel(K: np.ndarray) -> np.ndarray:
    """Double-center a symmetric Gram matrix so rows and columns sum to zero."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"kernel matrix must be square, got {K.shape}")
    if np.abs(K - K.T).max() > 1e-9:
        raise ValueError("kernel matrix is not symmetric within 1e-9")
    col_means = K.mean(axis=0)
    grand_mean = col_means.mean()
    return K - col_means[None, :] - col_means[:, None] + grand_mean


def center_kernel_cross(K_test: np.ndarray, K_train: np.ndarray) -> np.ndarray:
    """Center a cross Gram matrix with the training set's centering statistics.

    K_train must be the uncentered training Gram matrix whose columns index the
    same training points as K_test's columns.
    """
    K_test = np.asarray(K_test, dtype=np.float64)
    K_train = np.asarray(K_train, dtype=np.float64)
    if K_train.ndim != 2 or K_train.shape[0] != K_train.shape[1]:
        raise ValueError(f"training kernel must be square, got {K_train.shape}")
    if K_test.shape[1] != K_train.shape[0]:
        raise ValueError(
            f"dimension mismatch: K_test has {K_test.shape[1]} columns, K_train is {K_train.shape[0]} wide"
        )
    train_col_means = K_train.mean(axis=0)
    test_row_means = K_test.mean(axis=1)
    grand_mean = train_col_means.mean()
    return K_test - train_col_means[None, :] - test_row_means[:, None] + grand_mean
