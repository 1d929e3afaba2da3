"""Labeled feature sets, per-class subsampling/splitting, and the model-zoo manifest."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from distortion_lens import npyio


@dataclass(frozen=True)
class FeatureSet:
    """One layer's labeled feature matrix: N samples x D dimensions, C classes."""

    features: np.ndarray
    labels: np.ndarray
    model_id: str
    layer_id: str
    num_classes: int

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise ValueError(f"features must be a 2-D matrix, got shape {feats.shape}")
        n, d = feats.shape
        if n < 1 or d < 1:
            raise ValueError(f"features must have at least one row and column, got {feats.shape}")
        if labels.shape != (n,):
            raise ValueError(
                f"shape mismatch: {n} feature rows but {labels.shape[0] if labels.ndim == 1 else labels.shape} labels"
            )
        if not np.isfinite(feats).all():
            raise ValueError("features contain non-finite values (NaN or Inf)")
        c = int(self.num_classes)
        if c < 2:
            raise ValueError(f"need at least 2 classes, got {c}")
        if labels.min() < 0 or labels.max() >= c:
            raise ValueError(f"labels must lie in [0, {c}), got range [{labels.min()}, {labels.max()}]")
        present = np.unique(labels)
        if present.size != c:
            missing = sorted(set(range(c)) - set(present.tolist()))
            raise ValueError(f"missing class ids {missing}: every class in [0, {c}) must occur")
        feats.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_classes", c)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_dims(self) -> int:
        return self.features.shape[1]

    def class_indices(self, class_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == class_id)

    def select(self, indices: np.ndarray) -> "FeatureSet":
        """Row subset preserving metadata; indices must keep every class present."""
        return FeatureSet(
            features=self.features[indices],
            labels=self.labels[indices],
            model_id=self.model_id,
            layer_id=self.layer_id,
            num_classes=self.num_classes,
        )


def load_feature_set(feature_path, label_path, model_id: str, layer_id: str) -> FeatureSet:
    """Load and validate one layer's features + labels from interchange files."""
    features = npyio.read_features(feature_path)
    labels = npyio.read_labels(label_path)
    if labels.ndim != 1:
        raise ValueError(f"{label_path}: labels must be a 1-D array, got shape {labels.shape}")
    if features.ndim != 2:
        raise ValueError(f"{feature_path}: features must be a 2-D array, got shape {features.shape}")
    if labels.size == 0:
        raise ValueError(f"{label_path}: empty label array")
    num_classes = int(labels.max()) + 1
    return FeatureSet(
        features=features,
        labels=labels,
        model_id=model_id,
        layer_id=layer_id,
        num_classes=num_classes,
    )


def save_feature_set(fs: FeatureSet, feature_path, label_path) -> None:
    npyio.write_array(feature_path, fs.features)
    npyio.write_array(label_path, fs.labels)


def subsample_per_class(fs: FeatureSet, max_per_class: int, seed: int) -> FeatureSet:
    """Cap each class at max_per_class samples, chosen uniformly without replacement.

    Deterministic for a fixed seed; surviving samples keep their relative order.
    """
    if max_per_class < 2:
        raise ValueError(f"max_per_class must be >= 2, got {max_per_class}")
    rng = np.random.default_rng(seed)
    keep = []
    for c in range(fs.num_classes):
        idx = fs.class_indices(c)
        if idx.size > max_per_class:
            idx = rng.choice(idx, size=max_per_class, replace=False)
        keep.append(idx)
    keep = np.sort(np.concatenate(keep))
    return fs.select(keep)


def split_subsets(fs: FeatureSet, k: int, seed: int) -> list[FeatureSet]:
    """Stratified split into k mutually-exclusive subsets covering all of fs.

    Each class's samples are spread as evenly as possible (counts differ by at
    most 1 across subsets). Deterministic for a fixed seed.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    fold_indices: list[list[np.ndarray]] = [[] for _ in range(k)]
    for c in range(fs.num_classes):
        idx = fs.class_indices(c)
        if idx.size < k:
            raise ValueError(f"class {c} has {idx.size} samples, fewer than k={k}")
        shuffled = rng.permutation(idx)
        for f in range(k):
            fold_indices[f].append(shuffled[f::k])
    out = []
    for f in range(k):
        merged = np.sort(np.concatenate(fold_indices[f]))
        out.append(fs.select(merged))
    return out


@dataclass(frozen=True)
class ManifestLayer:
    layer_id: str
    features: str
    labels: str


@dataclass(frozen=True)
class ManifestModel:
    model_id: str
    train_accuracy: float
    test_accuracy: float | None
    layers: tuple[ManifestLayer, ...]


@dataclass(frozen=True)
class Manifest:
    """Declarative model-zoo listing; file paths resolve relative to root."""

    models: tuple[ManifestModel, ...]
    root: Path = field(default_factory=Path)

    def __post_init__(self):
        ids = [m.model_id for m in self.models]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate model_id in manifest")
        for m in self.models:
            layer_ids = [l.layer_id for l in m.layers]
            if len(set(layer_ids)) != len(layer_ids):
                raise ValueError(f"duplicate layer_id within model {m.model_id}")
            for acc, name in ((m.train_accuracy, "train_accuracy"), (m.test_accuracy, "test_accuracy")):
                if acc is not None and not (0.0 <= acc <= 1.0):
                    raise ValueError(f"model {m.model_id}: {name}={acc} outside [0, 1]")

    def resolve(self, rel: str) -> Path:
        return (Path(self.root) / rel).resolve()

    def load_layer(self, model: ManifestModel, layer: ManifestLayer) -> FeatureSet:
        return load_feature_set(
            self.resolve(layer.features), self.resolve(layer.labels), model.model_id, layer.layer_id
        )


def load_manifest(path) -> Manifest:
    path = Path(path)
    with open(path) as f:
        doc = json.load(f)
    models = []
    for entry in doc.get("models", []):
        layers = tuple(
            ManifestLayer(layer_id=l["layer_id"], features=l["features"], labels=l["labels"])
            for l in entry["layers"]
        )
        models.append(
            ManifestModel(
                model_id=entry["model_id"],
                train_accuracy=float(entry["train_accuracy"]),
                test_accuracy=None if entry.get("test_accuracy") is None else float(entry["test_accuracy"]),
                layers=layers,
            )
        )
    return Manifest(models=tuple(models), root=path.parent)


def save_manifest(manifest: Manifest, path) -> None:
    doc = {
        "models": [
            {
                "model_id": m.model_id,
                "train_accuracy": m.train_accuracy,
                "test_accuracy": m.test_accuracy,
                "layers": [
                    {"layer_id": l.layer_id, "features": l.features, "labels": l.labels}
                    for l in m.layers
                ],
            }
            for m in manifest.models
        ]
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
