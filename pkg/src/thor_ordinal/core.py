"""Shared domain types: boundaries, rank encodings, inference rules, datasets.

Ranks are plain integers ``1..k``. Extended binary labels are int8 vectors
of length ``k-1`` with ``y-1`` leading ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import InfeasibleMargin, InvalidClassCount, InvalidLabel, ShapeError

DEFAULT_MARGIN = 0.5


def check_class_count(k):
    if int(k) != k or k < 2:
        raise InvalidClassCount(f"need at least 2 classes, got {k!r}")
    return int(k)


def check_label(y, k):
    if int(y) != y or not 1 <= y <= k:
        raise InvalidLabel(f"label {y!r} outside 1..{k}")
    return int(y)


@dataclass(frozen=True)
class Boundaries:
    """Fixed, strictly increasing thresholds ``b_0 < ... < b_K`` and a margin.

    Class ``i`` owns the half-open segment ``(b_{i-1}, b_i]``. The margin only
    matters for training; inference ignores it.
    """

    thresholds: tuple
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        t = tuple(float(v) for v in self.thresholds)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "margin", float(self.margin))
        if len(t) < 3:
            raise InvalidClassCount(f"need K+1 >= 3 thresholds, got {len(t)}")
        if not all(np.isfinite(t)):
            raise ValueError("thresholds must be finite")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError(f"thresholds must be strictly increasing: {t}")
        if not (self.margin >= 0 and np.isfinite(self.margin)):
            raise ValueError(f"margin must be finite and >= 0, got {self.margin}")

    @property
    def k(self):
        return len(self.thresholds) - 1

    @property
    def array(self):
        return np.asarray(self.thresholds, dtype=np.float64)

    def segments(self):
        t = self.thresholds
        return [(t[i - 1], t[i]) for i in range(1, len(t))]

    def midpoints(self):
        t = self.array
        return 0.5 * (t[:-1] + t[1:])

    def min_width(self):
        return float(np.min(np.diff(self.array)))

    def with_margin(self, margin):
        return Boundaries(self.thresholds, margin)

    def check_margin_feasible(self):
        """Raise unless every segment is at least ``2 * margin`` wide."""
        if 2.0 * self.margin > self.min_width():
            raise InfeasibleMargin(
                f"margin {self.margin} exceeds half the narrowest segment "
                f"({self.min_width()}); the margin-shrunk region would be empty"
            )


def default_boundaries(k, margin=DEFAULT_MARGIN):
    """Unit segments starting at -1: ``b_i = i - 1`` for ``i = 0..k``."""
    k = check_class_count(k)
    return Boundaries(tuple(float(i - 1) for i in range(k + 1)), margin)


def infer_rank_threshold(score, b):
    """Rank whose segment contains ``score``; accepts a scalar or an array."""
    arr = np.asarray(score, dtype=np.float64)
    ranks = kernels.threshold_ranks(arr.reshape(-1), b.array)
    if arr.ndim == 0:
        return int(ranks[0])
    return ranks.reshape(arr.shape)


def encode_extended_binary(y, k):
    k = check_class_count(k)
    y = check_label(y, k)
    bits = np.zeros(k - 1, dtype=np.int8)
    bits[: y - 1] = 1
    return bits


def encode_extended_binary_batch(labels, k):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 1 or labels.max() > k):
        raise InvalidLabel(f"labels must lie in 1..{k}")
    return (labels[:, None] > np.arange(1, k)[None, :]).astype(np.int8)


def infer_rank_binary(decisions):
    """Count of positive decisions plus one. Works row-wise on 2-D input.

    Order is ignored, so inconsistent vectors still decode.
    """
    d = np.asarray(decisions)
    if d.ndim == 1:
        return int(d.sum()) + 1
    return d.sum(axis=1).astype(np.int64) + 1


def binary_decisions(logits):
    """Threshold sigmoid outputs at 0.5, i.e. logits at 0."""
    return (np.asarray(logits) > 0.0).astype(np.int8)


@dataclass
class OrdinalDataset:
    features: np.ndarray
    labels: np.ndarray
    k: int
    # latent 1-D score per example when the data is synthetic; None otherwise
    latent: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.k = check_class_count(self.k)
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[1] < 1:
            raise ShapeError(f"features must be a 2-D (n, d>=1) matrix, got shape {self.features.shape}")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != self.features.shape[0]:
            raise ShapeError("labels must be a vector with one entry per feature row")
        if labels.size and not np.all(labels == np.round(labels)):
            raise InvalidLabel("labels must be integers")
        self.labels = labels.astype(np.int64)
        if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.k):
            bad = self.labels[(self.labels < 1) | (self.labels > self.k)][0]
            raise InvalidLabel(f"label {bad} outside 1..{self.k}")
        if self.latent is not None:
            self.latent = np.asarray(self.latent, dtype=np.float64)
            if self.latent.shape != self.labels.shape:
                raise ShapeError("latent must align with labels")

    def __len__(self):
        return self.labels.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.k + 1)[1:]

    def indices_of(self, rank):
        return np.flatnonzero(self.labels == rank)

    def subset(self, idx: Sequence[int]) -> "OrdinalDataset":
        idx = np.asarray(idx, dtype=np.int64)
        latent = None if self.latent is None else self.latent[idx]
        return OrdinalDataset(self.features[idx], self.labels[idx], self.k, latent)
