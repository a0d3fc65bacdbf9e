"""Hit-or-miss accuracy, mean absolute rank error, and rank-consistency checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import EmptyInput, ShapeError


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    mae: float
    n: int
    inconsistency_rate: Optional[float] = None

    def as_line(self):
        parts = [f"accuracy={self.accuracy!r}", f"mae={self.mae!r}", f"n={self.n}"]
        if self.inconsistency_rate is not None:
            parts.append(f"inconsistency_rate={self.inconsistency_rate!r}")
        return " ".join(parts)


def _pair(preds, labels):
    p = np.asarray(preds, dtype=np.int64).ravel()
    y = np.asarray(labels, dtype=np.int64).ravel()
    if p.shape != y.shape:
        raise ShapeError(f"{p.size} predictions vs {y.size} labels")
    if p.size == 0:
        raise EmptyInput("metrics need at least one example")
    return p, y


def accuracy(preds, labels):
    p, y = _pair(preds, labels)
    return int(np.count_nonzero(p == y)) / p.size


def mae(preds, labels):
    # integer numerator keeps the result exact up to one division
    p, y = _pair(preds, labels)
    return int(np.abs(p - y).sum()) / p.size


def inconsistency_count(decisions):
    """Rows that have a 0 before a 1; returns ``(count, rate)``."""
    try:
        d = np.array(decisions, dtype=np.int64)
    except ValueError as exc:
        raise ShapeError(f"ragged decision vectors: {exc}") from None
    if d.ndim == 1:
        d = d[None, :]
    if d.ndim != 2:
        raise ShapeError(f"decision vectors must form a 2-D array, got shape {d.shape}")
    if d.shape[0] == 0:
        raise EmptyInput("no decision vectors")
    if np.any((d != 0) & (d != 1)):
        raise ValueError("decisions must be 0/1")
    count = int(kernels.inconsistent_rows(d).sum())
    return count, count / d.shape[0]


def report(preds, labels, decisions=None):
    rate = None if decisions is None else inconsistency_count(decisions)[1]
    return MetricsReport(accuracy(preds, labels), mae(preds, labels), int(np.size(labels)), rate)
