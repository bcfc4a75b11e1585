"""Speaker identification toolkit.

Pipeline: cepstral features -> GMM-UBM -> MAP-adapted mean supervectors
-> total-variability i-vectors -> cosine prediction scores.
"""

from .adaptation import Supervector, map_adapt_means, supervector
from .audio import AudioSignal, FrameSequence, apply_window, frame_signal, pre_emphasize, read_wav
from .config import PipelineConfig, load_config
from .features import (
    FeatureMatrix,
    FilterBank,
    build_filterbank,
    cepstral_coefficients,
    delta,
    extract_features,
    power_spectrum,
)
from .gmm import GmmModel, log_density, responsibilities, train_ubm
from .scoring import (
    NormalizedProfile,
    ScoreEntry,
    ScoreReport,
    cosine_similarity,
    decide,
    divergence,
    predict_score,
    score_matrix,
)
from .targets import TargetList
from .total_variability import (
    TotalVariabilityModel,
    build_covariance,
    extract_ivector,
    fit,
    reconstruct_supervector,
    symmetric_eigendecomposition,
)

__version__ = "0.1.0"

__all__ = [
    "AudioSignal",
    "FeatureMatrix",
    "FilterBank",
    "FrameSequence",
    "GmmModel",
    "NormalizedProfile",
    "PipelineConfig",
    "ScoreEntry",
    "ScoreReport",
    "Supervector",
    "TargetList",
    "TotalVariabilityModel",
    "apply_window",
    "build_covariance",
    "build_filterbank",
    "cepstral_coefficients",
    "cosine_similarity",
    "decide",
    "delta",
    "divergence",
    "extract_features",
    "extract_ivector",
    "fit",
    "frame_signal",
    "load_config",
    "log_density",
    "map_adapt_means",
    "power_spectrum",
    "pre_emphasize",
    "predict_score",
    "read_wav",
    "reconstruct_supervector",
    "responsibilities",
    "score_matrix",
    "supervector",
    "symmetric_eigendecomposition",
    "train_ubm",
]
