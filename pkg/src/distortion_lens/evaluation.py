"""Cross-subset validation, per-model complexity scoring, and accuracy correlation."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from distortion_lens import gmm as gmm_mod
from distortion_lens import kpca as kpca_mod
from distortion_lens import svm as svm_mod
from distortion_lens.config import RunConfig
from distortion_lens.distortion import DistortionMatrix, l2_distortion_matrix, normalized_trace
from distortion_lens.feature_store import FeatureSet, Manifest, ManifestModel, split_subsets, subsample_per_class
from distortion_lens.kernels import KernelParams, default_gamma
from distortion_lens.utils import stable_seed, worker_count


class Measure(str, Enum):
    L2_TRACE = "l2_trace"
    GMM_TRACE = "gmm_trace"
    SVM_TRACE = "svm_trace"
    SV_COUNT = "sv_count"


@dataclass(frozen=True)
class ComplexityScore:
    model_id: str
    measure: Measure
    per_layer: tuple[tuple[str, float], ...]
    aggregate: float


@dataclass(frozen=True)
class CorrelationReport:
    measure: Measure
    r_squared: float | None    # None when fewer than 2 models carry an accuracy
    slope: float | None
    intercept: float | None
    points: tuple[tuple[str, float, float], ...]  # (model_id, score, test_accuracy)
    scores: tuple[ComplexityScore, ...] = ()      # every scored model, accuracy or not


def _concat(sets: list[FeatureSet]) -> FeatureSet:
    first = sets[0]
    return FeatureSet(
        features=np.vstack([s.features for s in sets]),
        labels=np.concatenate([s.labels for s in sets]),
        model_id=first.model_id,
        layer_id=first.layer_id,
        num_classes=first.num_classes,
    )


def stratified_cap(fs: FeatureSet, cap: int, seed: int) -> FeatureSet:
    """Cap the total sample count, shrinking classes proportionally.

    Every class keeps at least 2 samples so downstream fits stay defined.
    """
    n = fs.n_samples
    if n <= cap:
        return fs
    rng = np.random.default_rng(seed)
    keep = []
    for c in range(fs.num_classes):
        idx = fs.class_indices(c)
        quota = max(2, int(round(idx.size * cap / n)))
        quota = min(quota, idx.size)
        keep.append(rng.choice(idx, size=quota, replace=False))
    return fs.select(np.sort(np.concatenate(keep)))


def _kernel_params(config: RunConfig, X: np.ndarray) -> KernelParams:
    if config.gamma_override is not None:
        return KernelParams(gamma=config.gamma_override)
    return default_gamma(X)


def cross_validated_distortion(
    fs: FeatureSet, k: int, method: str, config: RunConfig, seed: int
) -> DistortionMatrix:
    """Entrywise mean over k folds of the held-out-fold distortion matrix.

    method 'gmm': kPCA + per-class mixtures fitted on the fold complement,
    held-out points projected through the fitted kPCA; the confidence matrix
    is evaluated on the held-out fold. method 'svm': one-vs-one confusion on
    the held-out fold.
    """
    if method not in ("gmm", "svm"):
        raise ValueError(f"unknown method {method!r}")
    folds = split_subsets(fs, k, seed)
    matrices = []
    for f in range(k):
        val = folds[f]
        train = _concat([folds[g] for g in range(k) if g != f])
        if method == "gmm":
            params = _kernel_params(config, train.features)
            d = min(config.kpca_dim, train.n_samples - 1)
            model = kpca_mod.fit_kpca(train.features, params, d)
            val_coords = kpca_mod.transform(model, val.features)
            models = []
            for c in range(train.num_classes):
                pts = model.training_coordinates[train.class_indices(c)]
                n_comp = min(config.gmm_components, pts.shape[0])
                models.append(
                    gmm_mod.fit_gmm(
                        pts, n_comp, seed=stable_seed(seed, "gmm", f, c), class_id=c
                    )
                )
            coords_fs = FeatureSet(
                features=val_coords,
                labels=val.labels,
                model_id=val.model_id,
                layer_id=val.layer_id,
                num_classes=val.num_classes,
            )
            matrices.append(gmm_mod.gmm_confidence_distortion(models, coords_fs))
        else:
            params = KernelParams(config.gamma_override) if config.gamma_override else None
            matrices.append(
                svm_mod.svm_confusion_distortion(train, val, config.svm_c, params=params, tol=config.svm_tol)
            )
    mean_values = np.mean([m.values for m in matrices], axis=0)
    return DistortionMatrix(
        values=mean_values, kind=matrices[0].kind, model_id=fs.model_id, layer_id=fs.layer_id
    )


def _layer_value(fs: FeatureSet, measure: Measure, config: RunConfig, layer_seed: int) -> float:
    fs = subsample_per_class(fs, config.subsample_cap, stable_seed(layer_seed, "subsample"))
    if measure is Measure.L2_TRACE:
        return normalized_trace(l2_distortion_matrix(fs))
    fs = stratified_cap(fs, config.kernel_cap, stable_seed(layer_seed, "cap"))
    if measure is Measure.GMM_TRACE:
        dm = cross_validated_distortion(fs, config.folds, "gmm", config, stable_seed(layer_seed, "cv"))
        return normalized_trace(dm)
    if measure is Measure.SVM_TRACE:
        dm = cross_validated_distortion(fs, config.folds, "svm", config, stable_seed(layer_seed, "cv"))
        return normalized_trace(dm)
    if measure is Measure.SV_COUNT:
        params = KernelParams(config.gamma_override) if config.gamma_override else None
        count, _, _ = svm_mod.count_support_vectors(
            fs,
            epsilon=config.svm_epsilon,
            params=params,
            tol=config.svm_tol,
            c_schedule=config.svm_c_schedule,
        )
        return float(count)
    raise ValueError(f"unknown measure {measure}")


def _aggregate(values: list[float], mode: str) -> float:
    if mode == "mean":
        return float(np.mean(values))
    if mode == "last":
        return values[-1]
    if mode == "min":
        return float(min(values))
    if mode == "max":
        return float(max(values))
    raise ValueError(f"unknown aggregation mode {mode!r}")


def score_model(
    manifest: Manifest, model: ManifestModel, measure: Measure, config: RunConfig, seed: int
) -> ComplexityScore:
    """Per-layer complexity values plus the configured aggregate for one model.

    Layers are independent work units; results are reduced in manifest order so
    the score does not depend on the thread schedule.
    """
    def one_layer(layer):
        layer_seed = stable_seed(seed, model.model_id, layer.layer_id, measure.value)
        try:
            fs = manifest.load_layer(model, layer)
            return _layer_value(fs, measure, config, layer_seed)
        except Exception as exc:
            raise RuntimeError(
                f"model {model.model_id!r} layer {layer.layer_id!r} failed for {measure.value}: {exc}"
            ) from exc

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        values = list(pool.map(one_layer, model.layers))
    per_layer = tuple((layer.layer_id, float(v)) for layer, v in zip(model.layers, values))
    return ComplexityScore(
        model_id=model.model_id,
        measure=measure,
        per_layer=per_layer,
        aggregate=_aggregate([v for _, v in per_layer], config.aggregation),
    )


def r_squared(scores, accuracies):
    """Squared Pearson correlation plus the least-squares line accuracy ~ score.

    Returns (r2, slope, intercept).
    """
    s = np.asarray(scores, dtype=np.float64)
    a = np.asarray(accuracies, dtype=np.float64)
    if s.shape != a.shape or s.ndim != 1 or s.size < 2:
        raise ValueError("need two equal-length 1-D lists with at least 2 entries")
    if s.var() == 0.0 or a.var() == 0.0:
        raise ValueError("zero-variance input: correlation undefined")
    s_c = s - s.mean()
    a_c = a - a.mean()
    r = float((s_c @ a_c) / np.sqrt((s_c @ s_c) * (a_c @ a_c)))
    slope = float((s_c @ a_c) / (s_c @ s_c))
    intercept = float(a.mean() - slope * s.mean())
    return r * r, slope, intercept


def correlate_zoo(
    manifest: Manifest, measures: list[Measure], config: RunConfig, seed: int
):
    """Score every model for every measure and correlate against test accuracy.

    Models without a known test accuracy are scored but excluded from the
    correlation. Returns (reports, failures) where failures maps model_id to a
    diagnostic for models whose scoring aborted.
    """
    with_acc = [m for m in manifest.models if m.test_accuracy is not None]
    reports = []
    failures: dict[str, str] = {}
    for measure in measures:
        scores = []
        for model in manifest.models:
            if model.model_id in failures:
                continue
            try:
                scores.append(score_model(manifest, model, measure, config, seed))
            except RuntimeError as exc:
                failures[model.model_id] = str(exc)
        by_id = {s.model_id: s for s in scores}
        points = tuple(
            (m.model_id, by_id[m.model_id].aggregate, m.test_accuracy)
            for m in with_acc
            if m.model_id in by_id
        )
        if len(points) >= 2:
            r2, slope, intercept = r_squared([p[1] for p in points], [p[2] for p in points])
        else:
            r2 = slope = intercept = None
        reports.append(
            CorrelationReport(
                measure=measure,
                r_squared=r2,
                slope=slope,
                intercept=intercept,
                points=points,
                scores=tuple(scores),
            )
        )
    return reports, failures


def report_document(manifest: Manifest, reports: list[CorrelationReport], failures: dict[str, str]) -> dict:
    accuracy = {m.model_id: m.test_accuracy for m in manifest.models}
    doc = {
        "measures": [
            {
                "measure": rep.measure.value,
                "r_squared": rep.r_squared,
                "slope": rep.slope,
                "intercept": rep.intercept,
                "models": [
                    {
                        "model_id": s.model_id,
                        "aggregate": s.aggregate,
                        "per_layer": {layer_id: value for layer_id, value in s.per_layer},
                        "test_accuracy": accuracy.get(s.model_id),
                    }
                    for s in rep.scores
                ],
            }
            for rep in reports
        ]
    }
    if failures:
        doc["failed_models"] = [
            {"model_id": model_id, "error": message} for model_id, message in sorted(failures.items())
        ]
    return doc


def write_report_json(doc: dict, path) -> None:
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def write_report_csv(doc: dict, path) -> None:
    """Flat per-layer values: model_id, measure, layer_id, value."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["model_id", "measure", "layer_id", "value"])
        for measure_entry in doc["measures"]:
            for model_entry in measure_entry["models"]:
                for layer_id, value in model_entry["per_layer"].items():
                    writer.writerow([model_entry["model_id"], measure_entry["measure"], layer_id, repr(value)])
