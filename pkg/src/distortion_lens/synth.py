"""Synthetic model zoo: a desk-scale stand-in for a real feature-extraction dump.

Each synthetic "model" emits per-layer Gaussian blob features whose class
separation (in noise units) grows with depth at a model-specific rate rho.
Ground-truth test accuracy is measured by a nearest-class-mean classifier on a
fresh holdout draw from the final layer's distribution.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from distortion_lens.feature_store import Manifest, ManifestLayer, ManifestModel, save_manifest
from distortion_lens.npyio import write_array
from distortion_lens.utils import stable_seed

SEP_SCALE = 2.0
SHRINK = 1.0


def _class_directions(n_classes: int, dims: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.normal(size=(max(n_classes, 1), dims))
    if n_classes <= dims:
        q, _ = np.linalg.qr(raw.T)
        return q.T[:n_classes]
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def layer_geometry(rho: float, layer_index: int, n_layers: int) -> tuple[float, float]:
    """(separation, noise sigma) for one layer of a model with rate rho."""
    depth = (layer_index + 1) / n_layers
    sep = rho * depth * SEP_SCALE
    sigma = 1.0 / (1.0 + rho * depth * SHRINK)
    return sep, sigma


def sample_layer(
    directions: np.ndarray,
    rho: float,
    layer_index: int,
    n_layers: int,
    samples_per_class: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    n_classes, dims = directions.shape
    sep, sigma = layer_geometry(rho, layer_index, n_layers)
    features = np.empty((n_classes * samples_per_class, dims))
    labels = np.repeat(np.arange(n_classes, dtype=np.int64), samples_per_class)
    for c in range(n_classes):
        block = slice(c * samples_per_class, (c + 1) * samples_per_class)
        features[block] = directions[c] * sep + sigma * rng.normal(size=(samples_per_class, dims))
    return features, labels


def nearest_mean_accuracy(
    train_features: np.ndarray, train_labels: np.ndarray, test_features: np.ndarray, test_labels: np.ndarray
) -> float:
    """Holdout accuracy of a nearest-class-mean classifier fit on the training draw."""
    classes = np.unique(train_labels)
    means = np.vstack([train_features[train_labels == c].mean(axis=0) for c in classes])
    d2 = ((test_features[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    predicted = classes[np.argmin(d2, axis=1)]
    return float(np.mean(predicted == test_labels))


def generate_zoo(
    n_models: int,
    n_classes: int,
    dims: int,
    n_layers: int,
    samples_per_class: int,
    seed: int,
    out_dir,
    rho_range: tuple[float, float] = (0.1, 1.0),
) -> Manifest:
    """Write feature/label files plus a manifest for a synthetic zoo.

    Separation rates are evenly spaced over rho_range across models, so
    ground-truth accuracies span chance-adjacent to near-perfect.
    """
    for name, value in (
        ("n_models", n_models),
        ("n_classes", n_classes),
        ("dims", dims),
        ("n_layers", n_layers),
        ("samples_per_class", samples_per_class),
    ):
        if value < 1:
            raise ValueError(f"{name} must be positive, got {value}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_rng = np.random.default_rng(stable_seed(seed, "directions"))
    directions = _class_directions(n_classes, dims, base_rng)
    rhos = np.linspace(rho_range[0], rho_range[1], n_models)
    models = []
    for m, rho in enumerate(rhos):
        model_id = f"model_{m:03d}"
        rng = np.random.default_rng(stable_seed(seed, "model", m))
        model_dir = out_dir / model_id
        model_dir.mkdir(exist_ok=True)
        layers = []
        last_features = last_labels = None
        for l in range(n_layers):
            features, labels = sample_layer(directions, rho, l, n_layers, samples_per_class, rng)
            feat_rel = f"{model_id}/layer_{l}.features.npy"
            label_rel = f"{model_id}/layer_{l}.labels.npy"
            write_array(out_dir / feat_rel, features)
            write_array(out_dir / label_rel, labels)
            layers.append(ManifestLayer(layer_id=f"layer_{l}", features=feat_rel, labels=label_rel))
            last_features, last_labels = features, labels
        holdout_features, holdout_labels = sample_layer(
            directions, rho, n_layers - 1, n_layers, samples_per_class, rng
        )
        test_acc = nearest_mean_accuracy(last_features, last_labels, holdout_features, holdout_labels)
        train_acc = nearest_mean_accuracy(last_features, last_labels, last_features, last_labels)
        models.append(
            ManifestModel(
                model_id=model_id,
                train_accuracy=train_acc,
                test_accuracy=test_acc,
                layers=tuple(layers),
            )
        )
    manifest = Manifest(models=tuple(models), root=out_dir)
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest
