"""Layer-wise vector-quantization distortion measures for predicting generalization."""

from distortion_lens.feature_store import FeatureSet, Manifest, load_feature_set
from distortion_lens.distortion import DistortionMatrix, l2_distortion_matrix, normalized_trace

__version__ = "0.1.0"

__all__ = [
    "FeatureSet",
    "Manifest",
    "load_feature_set",
    "DistortionMatrix",
    "l2_distortion_matrix",
    "normalized_trace",
]
