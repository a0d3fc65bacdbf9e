"""Ordinal regression with fixed thresholds and a pairwise threshold-ranking
loss, plus classification-style baselines, on a small numpy network."""
from .core import (
    Boundaries,
    OrdinalDataset,
    default_boundaries,
    encode_extended_binary,
    infer_rank_binary,
    infer_rank_threshold,
)
from .errors import NumericFault, OrdinalError
from .kernels import BACKEND
from .methods import METHODS, Predictor
from .trainer import TrainConfig, TrainReport, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Boundaries",
    "METHODS",
    "NumericFault",
    "OrdinalDataset",
    "OrdinalError",
    "Predictor",
    "TrainConfig",
    "TrainReport",
    "default_boundaries",
    "encode_extended_binary",
    "evaluate",
    "infer_rank_binary",
    "infer_rank_threshold",
    "train",
]
