"""Per-class Gaussian mixtures in projected coordinates, fitted by EM.

Label distortion comes in two flavors: a confidence matrix built from the
posterior over all classes' components, and a hard confusion matrix from
closest-centroid assignment.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from distortion_lens.distortion import DistortionKind, DistortionMatrix
from distortion_lens.feature_store import FeatureSet

COV_REG = 1e-6
N_RESTARTS = 3


@dataclass(frozen=True)
class GmmComponent:
    weight: float
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class GmmModel:
    class_id: int
    components: tuple[GmmComponent, ...]
    log_likelihoods: tuple[float, ...] = ()
    degenerate: bool = False

    def __post_init__(self):
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"component weights sum to {total}, expected 1")


def _log_gaussian(X: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Log N(x; mean, cov) for each row of X, via Cholesky."""
    d = mean.shape[0]
    chol = np.linalg.cholesky(cov)
    diff = X - mean[None, :]
    solved = np.linalg.solve(chol, diff.T)
    maha = np.sum(solved**2, axis=0)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (d * np.log(2.0 * np.pi) + log_det + maha)


def _kmeanspp_means(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    means = np.empty((k, points.shape[1]))
    means[0] = points[rng.integers(n)]
    sq_d = np.sum((points - means[0]) ** 2, axis=1)
    for j in range(1, k):
        total = sq_d.sum()
        if total <= 0:
            means[j] = points[rng.integers(n)]
            continue
        idx = rng.choice(n, p=sq_d / total)
        means[j] = points[idx]
        sq_d = np.minimum(sq_d, np.sum((points - means[j]) ** 2, axis=1))
    return means


def _em_once(points, k, rng, max_iter, tol):
    n, d = points.shape
    means = _kmeanspp_means(points, k, rng)
    base_cov = np.cov(points, rowvar=False).reshape(d, d) + COV_REG * np.eye(d)
    covs = np.repeat(base_cov[None, :, :], k, axis=0)
    weights = np.full(k, 1.0 / k)
    history = []
    snapshot = None
    for _ in range(max_iter):
        log_probs = np.column_stack(
            [np.log(weights[j]) + _log_gaussian(points, means[j], covs[j]) for j in range(k)]
        )
        log_norm = logsumexp(log_probs, axis=1)
        ll = float(log_norm.sum())
        resp = np.exp(log_probs - log_norm[:, None])
        if history and ll < history[-1]:
            # the covariance floor can nudge the likelihood down; stop at the
            # last improving iterate instead of recording a decrease
            means, covs, weights = snapshot
            break
        history.append(ll)
        if len(history) > 1 and abs(ll - history[-2]) < tol * max(abs(history[-2]), 1.0):
            break
        snapshot = (means.copy(), covs.copy(), weights.copy())
        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 1e-300)
        weights = nk / n
        means = (resp.T @ points) / nk[:, None]
        for j in range(k):
            diff = points - means[j]
            covs[j] = (resp[:, j][:, None] * diff).T @ diff / nk[j] + COV_REG * np.eye(d)
    return means, covs, weights, history


def fit_gmm(
    points: np.ndarray,
    n_components: int,
    seed: int,
    max_iter: int = 200,
    tol: float = 1e-6,
    class_id: int = 0,
) -> GmmModel:
    """Fit a full-covariance mixture by EM with k-means++ seeding and restarts.

    Keeps the best of N_RESTARTS runs by final log-likelihood. Identical input
    points degrade gracefully to a single floor-covariance component.
    """
    points = np.asarray(points, dtype=np.float64)
    n, d = points.shape
    if n_components < 1:
        raise ValueError(f"n_components must be >= 1, got {n_components}")
    if n < n_components:
        raise ValueError(f"need at least {n_components} points, got {n}")
    if np.allclose(points, points[0], atol=0.0, rtol=0.0):
        warnings.warn("all points identical: returning degenerate single-component model", stacklevel=2)
        comp = GmmComponent(weight=1.0, mean=points[0].copy(), covariance=COV_REG * np.eye(d))
        return GmmModel(class_id=class_id, components=(comp,), degenerate=True)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(N_RESTARTS):
        means, covs, weights, history = _em_once(points, n_components, rng, max_iter, tol)
        if best is None or history[-1] > best[3][-1]:
            best = (means, covs, weights, history)
    means, covs, weights, history = best
    weights = weights / weights.sum()
    comps = tuple(
        GmmComponent(weight=float(weights[j]), mean=means[j].copy(), covariance=covs[j].copy())
        for j in range(n_components)
    )
    return GmmModel(class_id=class_id, components=comps, log_likelihoods=tuple(history))


def _check_models(models: list[GmmModel]) -> int:
    class_ids = sorted(m.class_id for m in models)
    if class_ids != list(range(len(models))):
        raise ValueError(f"models must cover classes 0..C-1, got class ids {class_ids}")
    return len(models)


def _log_joint(models: list[GmmModel], X: np.ndarray):
    """Log of (uniform class prior) * weight * density for every (class, component).

    Returns the M x T matrix plus the (class, component) pair owning each column.
    """
    c = _check_models(models)
    by_class = sorted(models, key=lambda m: m.class_id)
    cols = []
    pairs = []
    log_prior = -np.log(c)
    for m in by_class:
        for k_idx, comp in enumerate(m.components):
            cols.append(log_prior + np.log(comp.weight) + _log_gaussian(X, comp.mean, comp.covariance))
            pairs.append((m.class_id, k_idx))
    return np.column_stack(cols), pairs


def responsibilities(models: list[GmmModel], x: np.ndarray) -> np.ndarray:
    """Posterior over all (class, component) pairs for one point; sums to 1."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    log_joint, _ = _log_joint(models, x)
    return np.exp(log_joint[0] - logsumexp(log_joint[0]))


def gmm_confidence_distortion(models: list[GmmModel], fs_coords: FeatureSet) -> DistortionMatrix:
    """Entry [i][j]: mean over class-i samples of the max responsibility among class-j components."""
    c = _check_models(models)
    if c != fs_coords.num_classes:
        raise ValueError(f"{c} models but {fs_coords.num_classes} classes in the data")
    log_joint, pairs = _log_joint(models, fs_coords.features)
    resp = np.exp(log_joint - logsumexp(log_joint, axis=1)[:, None])
    owner = np.array([p[0] for p in pairs])
    per_class_max = np.column_stack([resp[:, owner == j].max(axis=1) for j in range(c)])
    values = np.empty((c, c))
    for i in range(c):
        values[i] = per_class_max[fs_coords.class_indices(i)].mean(axis=0)
    return DistortionMatrix(
        values=values,
        kind=DistortionKind.GMM_CONFIDENCE,
        model_id=fs_coords.model_id,
        layer_id=fs_coords.layer_id,
    )


def gmm_centroid_confusion(models: list[GmmModel], fs_coords: FeatureSet) -> DistortionMatrix:
    """Hard assignment to the class owning the nearest component mean.

    Distance ties break toward the lower class id, then the lower component
    index (centroids are scanned in that order and argmin keeps the first).
    """
    c = _check_models(models)
    if c != fs_coords.num_classes:
        raise ValueError(f"{c} models but {fs_coords.num_classes} classes in the data")
    by_class = sorted(models, key=lambda m: m.class_id)
    centroids = np.vstack([comp.mean for m in by_class for comp in m.components])
    owner = np.array([m.class_id for m in by_class for _ in m.components])
    sq = np.sum((fs_coords.features[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    assigned = owner[np.argmin(sq, axis=1)]
    counts = np.zeros((c, c), dtype=np.int64)
    for i in range(c):
        idx = fs_coords.class_indices(i)
        counts[i] = np.bincount(assigned[idx], minlength=c)
    values = counts / counts.sum(axis=1, keepdims=True)
    return DistortionMatrix(
        values=values,
        kind=DistortionKind.GMM_CONFUSION,
        model_id=fs_coords.model_id,
        layer_id=fs_coords.layer_id,
    )


def ellipse_records(models: list[GmmModel]) -> list[dict]:
    """2-D ellipse descriptors (first two coordinate dims) for scatter plots."""
    records = []
    for m in sorted(models, key=lambda g: g.class_id):
        for k_idx, comp in enumerate(m.components):
            cov2 = comp.covariance[:2, :2]
            eigvals, eigvecs = np.linalg.eigh(cov2)
            angle = float(np.arctan2(eigvecs[1, 1], eigvecs[0, 1]))
            records.append(
                {
                    "class_id": m.class_id,
                    "component": k_idx,
                    "center": [float(comp.mean[0]), float(comp.mean[1])],
                    "semi_axes": [
                        float(np.sqrt(max(eigvals[1], 0.0))),
                        float(np.sqrt(max(eigvals[0], 0.0))),
                    ],
                    "angle": angle,
                    "weight": comp.weight,
                }
            )
    return records
