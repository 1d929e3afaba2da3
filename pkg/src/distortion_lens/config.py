"""Run configuration shared by the evaluation pipeline and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class RunConfig:
    folds: int = 3
    seed: int = 0
    subsample_cap: int = 500          # per-class cap before any fit
    kernel_cap: int = 2000            # global stratified cap for kernel-method fits
    gamma_override: float | None = None
    kpca_dim: int = 3
    gmm_components: int = 3
    svm_c: float = 10.0               # box constraint for confusion-matrix fits
    svm_c_schedule: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    svm_epsilon: float = 0.01
    svm_tol: float = 1e-3
    aggregation: str = "mean"         # mean | last | min | max

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if self.subsample_cap < 2:
            raise ValueError(f"subsample_cap must be >= 2, got {self.subsample_cap}")
        if self.kernel_cap < 2:
            raise ValueError(f"kernel_cap must be >= 2, got {self.kernel_cap}")
        if self.gamma_override is not None and self.gamma_override <= 0:
            raise ValueError(f"gamma override must be positive, got {self.gamma_override}")
        if self.kpca_dim < 1:
            raise ValueError(f"kpca_dim must be >= 1, got {self.kpca_dim}")
        if self.gmm_components < 1:
            raise ValueError(f"gmm_components must be >= 1, got {self.gmm_components}")
        if self.svm_c <= 0:
            raise ValueError(f"svm_c must be positive, got {self.svm_c}")
        if not self.svm_c_schedule or any(c <= 0 for c in self.svm_c_schedule):
            raise ValueError("svm_c_schedule must be a nonempty tuple of positive reals")
        if list(self.svm_c_schedule) != sorted(self.svm_c_schedule):
            raise ValueError("svm_c_schedule must be ascending")
        if not (0.0 <= self.svm_epsilon < 1.0):
            raise ValueError(f"svm_epsilon must lie in [0, 1), got {self.svm_epsilon}")
        if self.svm_tol <= 0:
            raise ValueError(f"svm_tol must be positive, got {self.svm_tol}")
        if self.aggregation not in ("mean", "last", "min", "max"):
            raise ValueError(f"unknown aggregation mode {self.aggregation!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "svm_c_schedule" in doc:
            doc = dict(doc, svm_c_schedule=tuple(doc["svm_c_schedule"]))
        return cls(**doc)
