"""Symbol-distortion matrices: mean minimum intra/inter-class Euclidean distances."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from distortion_lens.feature_store import FeatureSet


class DistortionKind(str, Enum):
    L2 = "l2"
    GMM_CONFIDENCE = "gmm_confidence"
    GMM_CONFUSION = "gmm_confusion"
    SVM_CONFUSION = "svm_confusion"


_ROW_STOCHASTIC = (DistortionKind.GMM_CONFUSION, DistortionKind.SVM_CONFUSION)


@dataclass(frozen=True)
class DistortionMatrix:
    """C x C per-layer distortion; semantics of the entries depend on kind."""

    values: np.ndarray
    kind: DistortionKind
    model_id: str = ""
    layer_id: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"distortion matrix must be square, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise ValueError("distortion matrix contains non-finite entries")
        if (values < 0).any():
            raise ValueError("distortion matrix entries must be >= 0")
        kind = DistortionKind(self.kind)
        if kind in _ROW_STOCHASTIC:
            row_sums = values.sum(axis=1)
            if np.abs(row_sums - 1.0).max() > 1e-9:
                raise ValueError(f"{kind.value} rows must sum to 1, got sums {row_sums}")
            if (values > 1.0).any():
                raise ValueError(f"{kind.value} entries must be <= 1")
        elif kind is DistortionKind.GMM_CONFIDENCE:
            if (values > 1.0 + 1e-12).any():
                raise ValueError("gmm_confidence entries must lie in [0, 1]")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", kind)

    @property
    def num_classes(self) -> int:
        return self.values.shape[0]


def min_distances(queries: np.ndarray, references: np.ndarray, exclude_identical_index: bool = False) -> np.ndarray:
    """Per-query minimum Euclidean distance to the reference set.

    With exclude_identical_index, queries and references are the same sample
    set and reference j == query i is skipped (index-level, not value-level).
    """
    queries = np.asarray(queries, dtype=np.float64)
    references = np.asarray(references, dtype=np.float64)
    if queries.ndim != 2 or references.ndim != 2:
        raise ValueError("queries and references must be 2-D matrices")
    if queries.shape[1] != references.shape[1]:
        raise ValueError(f"dimension mismatch: {queries.shape[1]} vs {references.shape[1]} columns")
    if exclude_identical_index:
        if queries.shape != references.shape:
            raise ValueError("exclude_identical_index requires queries and references to be the same set")
        if references.shape[0] < 2:
            raise ValueError("no references left after excluding the identical index")
    elif references.shape[0] < 1:
        raise ValueError("empty reference set")
    dists = cdist(queries, references)
    if exclude_identical_index:
        np.fill_diagonal(dists, np.inf)
    return dists.min(axis=1)


def l2_distortion_matrix(fs: FeatureSet) -> DistortionMatrix:
    """Mean minimum intra-class (diagonal) and inter-class (off-diagonal) distances.

    Entry [i][j] averages, over class-i samples, the distance to the nearest
    class-j sample (excluding the sample itself when i == j). Not symmetric.
    """
    per_class = [fs.features[fs.class_indices(c)] for c in range(fs.num_classes)]
    for c, pts in enumerate(per_class):
        if pts.shape[0] < 2:
            raise ValueError(f"class {c} has a single sample; intra-class distortion undefined")
    c_total = fs.num_classes
    values = np.empty((c_total, c_total))
    for i in range(c_total):
        for j in range(c_total):
            values[i, j] = min_distances(per_class[i], per_class[j], exclude_identical_index=(i == j)).mean()
    return DistortionMatrix(values=values, kind=DistortionKind.L2, model_id=fs.model_id, layer_id=fs.layer_id)


def normalized_trace(dm: DistortionMatrix) -> float:
    """Mean of the diagonal: the scalar complexity summary of a distortion matrix."""
    return float(np.mean(np.diag(dm.values)))
