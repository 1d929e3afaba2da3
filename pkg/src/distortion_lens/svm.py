"""RBF-kernel SVMs trained by sequential minimal optimization.

One-vs-one multiclass ensembles provide the confusion-matrix label distortion
and the support-vector-count complexity measure. Features are standardized
with training-split statistics before any kernel evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from distortion_lens.distortion import DistortionKind, DistortionMatrix
from distortion_lens.feature_store import FeatureSet
from distortion_lens.kernels import KernelParams, default_gamma, rbf_kernel_matrix

ALPHA_TOL = 1e-8
DEFAULT_EPSILON = 0.01
DEFAULT_C_SCHEDULE = (1.0, 10.0, 100.0, 1000.0)
DEFAULT_TOL = 1e-3
DEFAULT_MAX_PASSES = 200


@dataclass(frozen=True)
class BinarySvm:
    support_vectors: np.ndarray   # S x D (standardized coordinates)
    dual_coefs: np.ndarray        # S entries, alpha_i * y_i
    bias: float
    params: KernelParams
    C: float
    support_indices: np.ndarray   # original training-set row indices

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        K = rbf_kernel_matrix(X, self.support_vectors, self.params)
        return K @ self.dual_coefs + self.bias


@dataclass(frozen=True)
class SvmEnsemble:
    machines: dict  # (i, j) with i < j -> BinarySvm
    num_classes: int
    C: float
    params: KernelParams
    scaler_mean: np.ndarray
    scaler_scale: np.ndarray

    def __post_init__(self):
        expected = self.num_classes * (self.num_classes - 1) // 2
        if len(self.machines) != expected:
            raise ValueError(f"expected {expected} pairwise machines, got {len(self.machines)}")

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.scaler_mean) / self.scaler_scale


def _smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_passes: int):
    """Platt-style SMO on a precomputed kernel matrix. Returns (alpha, bias).

    Deterministic: candidate loops run in fixed index order. Terminates when a
    full sweep finds no KKT violator beyond tol, or after max_passes sweeps
    without progress.
    """
    n = K.shape[0]
    alpha = np.zeros(n)
    b = 0.0
    errors = -y.astype(np.float64)  # f(x_i) - y_i with all-zero alpha

    def take_step(i1: int, i2: int) -> bool:
        nonlocal b
        if i1 == i2:
            return False
        a1, a2 = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        e1, e2 = errors[i1], errors[i2]
        s = y1 * y2
        if s > 0:
            lo, hi = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        else:
            lo, hi = max(0.0, a2 - a1), min(C, C + a2 - a1)
        if hi - lo < 1e-12:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 1e-12:
            a2_new = a2 + y2 * (e1 - e2) / eta
            a2_new = min(hi, max(lo, a2_new))
        else:
            # flat direction: evaluate the dual at both clip ends
            f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22
            l1 = a1 + s * (a2 - lo)
            h1 = a1 + s * (a2 - hi)
            obj_lo = l1 * f1 + lo * f2 + 0.5 * l1**2 * k11 + 0.5 * lo**2 * k22 + s * lo * l1 * k12
            obj_hi = h1 * f1 + hi * f2 + 0.5 * h1**2 * k11 + 0.5 * hi**2 * k22 + s * hi * h1 * k12
            if obj_lo < obj_hi - 1e-12:
                a2_new = lo
            elif obj_hi < obj_lo - 1e-12:
                a2_new = hi
            else:
                return False
        if abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b1 = b - e1 - d1 * k11 - d2 * k12
        b2 = b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1_new < C:
            b_new = b1
        elif 0.0 < a2_new < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        errors[:] += d1 * K[i1] + d2 * K[i2] + (b_new - b)
        alpha[i1], alpha[i2] = a1_new, a2_new
        b = b_new
        return True

    def examine(i2: int) -> bool:
        y2, a2, e2 = y[i2], alpha[i2], errors[i2]
        r2 = e2 * y2
        if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0)):
            return False
        non_bound = np.flatnonzero((alpha > ALPHA_TOL) & (alpha < C - ALPHA_TOL))
        if non_bound.size > 1:
            i1 = int(non_bound[np.argmax(np.abs(errors[non_bound] - e2))])
            if take_step(i1, i2):
                return True
        for i1 in non_bound:
            if take_step(int(i1), i2):
                return True
        for i1 in range(n):
            if take_step(i1, i2):
                return True
        return False

    examine_all = True
    idle_sweeps = 0
    while idle_sweeps <= max_passes:
        num_changed = 0
        if examine_all:
            candidates = range(n)
        else:
            candidates = np.flatnonzero((alpha > ALPHA_TOL) & (alpha < C - ALPHA_TOL))
        for i in candidates:
            if examine(int(i)):
                num_changed += 1
        if examine_all:
            if num_changed == 0:
                break  # no KKT violator beyond tol remains
            examine_all = False
        elif num_changed == 0:
            examine_all = True
        idle_sweeps = idle_sweeps + 1 if num_changed == 0 else 0
    return alpha, b


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """Soft-margin dual W(alpha) = sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def train_binary_svm(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    params: KernelParams,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
    support_index_map: np.ndarray | None = None,
) -> BinarySvm:
    """Solve the soft-margin RBF dual by SMO and keep the support vectors.

    y must be +/-1 with both labels present. support_index_map, when given,
    translates local row indices to original training-set indices.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("both classes must be present in a binary SVM problem")
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    K = rbf_kernel_matrix(X, X, params)
    alpha, b = _smo_solve(K, y, C, tol, max_passes)
    sv = np.flatnonzero(alpha > ALPHA_TOL)
    if support_index_map is None:
        support_index_map = np.arange(X.shape[0])
    return BinarySvm(
        support_vectors=X[sv].copy(),
        dual_coefs=alpha[sv] * y[sv],
        bias=b,
        params=params,
        C=C,
        support_indices=np.asarray(support_index_map)[sv].copy(),
    )


def _fit_scaler(X: np.ndarray):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def train_multiclass(
    fs: FeatureSet,
    C: float,
    params: KernelParams | None = None,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
) -> SvmEnsemble:
    """One-vs-one ensemble: one binary machine per unordered class pair."""
    mean, scale = _fit_scaler(fs.features)
    Xs = (fs.features - mean) / scale
    if params is None:
        params = default_gamma(Xs)
    machines = {}
    for i, j in combinations(range(fs.num_classes), 2):
        idx = np.flatnonzero((fs.labels == i) | (fs.labels == j))
        y = np.where(fs.labels[idx] == j, 1.0, -1.0)
        machines[(i, j)] = train_binary_svm(
            Xs[idx], y, C, params, tol=tol, max_passes=max_passes, support_index_map=idx
        )
    return SvmEnsemble(
        machines=machines,
        num_classes=fs.num_classes,
        C=C,
        params=params,
        scaler_mean=mean,
        scaler_scale=scale,
    )


def predict(ensemble: SvmEnsemble, X_new: np.ndarray):
    """One-vs-one voting. Returns (labels, vote margins).

    Ties break by summed |decision value| over the tied classes, then by the
    lower class id. Margin is winning votes minus runner-up votes.
    """
    Xs = ensemble.standardize(X_new)
    n = Xs.shape[0]
    c = ensemble.num_classes
    votes = np.zeros((n, c), dtype=np.int64)
    conf = np.zeros((n, c))
    for (i, j), machine in sorted(ensemble.machines.items()):
        f = machine.decision_function(Xs)
        wins_j = f > 0
        votes[wins_j, j] += 1
        votes[~wins_j, i] += 1
        conf[:, i] += np.abs(f)
        conf[:, j] += np.abs(f)
    labels = np.empty(n, dtype=np.int64)
    for row in range(n):
        top = votes[row].max()
        tied = np.flatnonzero(votes[row] == top)
        if tied.size == 1:
            labels[row] = tied[0]
        else:
            # argmax keeps the first (lowest class id) on equal confidence
            labels[row] = tied[np.argmax(conf[row, tied])]
    sorted_votes = np.sort(votes, axis=1)
    margins = sorted_votes[:, -1] - (sorted_votes[:, -2] if c > 1 else 0)
    return labels, margins


def svm_confusion_distortion(
    train_fs: FeatureSet,
    val_fs: FeatureSet,
    C: float,
    params: KernelParams | None = None,
    tol: float = DEFAULT_TOL,
) -> DistortionMatrix:
    """Confusion matrix of a one-vs-one ensemble trained on train_fs, scored on val_fs."""
    if train_fs.num_classes != val_fs.num_classes:
        raise ValueError("train and validation sets disagree on the number of classes")
    ensemble = train_multiclass(train_fs, C, params=params, tol=tol)
    predicted, _ = predict(ensemble, val_fs.features)
    c = train_fs.num_classes
    counts = np.zeros((c, c), dtype=np.int64)
    for i in range(c):
        idx = val_fs.class_indices(i)
        counts[i] = np.bincount(predicted[idx], minlength=c)
    values = counts / counts.sum(axis=1, keepdims=True)
    return DistortionMatrix(
        values=values,
        kind=DistortionKind.SVM_CONFUSION,
        model_id=val_fs.model_id,
        layer_id=val_fs.layer_id,
    )


def ensemble_support_indices(ensemble: SvmEnsemble) -> np.ndarray:
    """Distinct original training indices appearing as a support vector in any machine."""
    all_idx = [m.support_indices for m in ensemble.machines.values()]
    return np.unique(np.concatenate(all_idx)) if all_idx else np.empty(0, dtype=np.int64)


def count_support_vectors(
    fs: FeatureSet,
    epsilon: float = DEFAULT_EPSILON,
    params: KernelParams | None = None,
    tol: float = DEFAULT_TOL,
    c_schedule: tuple[float, ...] = DEFAULT_C_SCHEDULE,
):
    """Support vectors needed for epsilon training error, searching C upward.

    Trains the ensemble at each C in order and stops at the first one whose
    training error is <= epsilon; otherwise reports the final C. Returns
    (count, achieved_error, C_used).
    """
    if not c_schedule:
        raise ValueError("c_schedule must be nonempty")
    if not (0.0 <= epsilon < 1.0):
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    count = achieved = c_used = None
    for C in c_schedule:
        ensemble = train_multiclass(fs, C, params=params, tol=tol)
        predicted, _ = predict(ensemble, fs.features)
        achieved = float(np.mean(predicted != fs.labels))
        count = int(ensemble_support_indices(ensemble).size)
        c_used = C
        if achieved <= epsilon:
            break
    return count, achieved, c_used
