"""Training objectives and their gradients w.r.t. model outputs.

Each objective comes in two flavours: a single-example/single-pair function
that mirrors the math one term at a time, and a ``*_batch`` function used by
the trainer, which averages over examples (or pairs) and routes the hot
per-row work through ``kernels``.

Hinge subgradients are 0 at the kink.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import check_label
from .errors import InvalidPair, ShapeError


@dataclass(frozen=True)
class LossValueAndGrad:
    value: float
    # one gradient per loss input, in the order the inputs were passed
    d_outputs: tuple


@dataclass(frozen=True)
class CnnporConfig:
    c: float = 1.0
    pair_margin: float = 1.0

    def __post_init__(self):
        if self.c < 0 or self.pair_margin < 0:
            raise ValueError("c and pair_margin must be >= 0")


@dataclass
class CoralHead:
    """K-1 independent biases added to one shared logit."""

    biases: np.ndarray
    shared_score_index: int = 0

    def __post_init__(self):
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.biases.ndim != 1 or not np.all(np.isfinite(self.biases)):
            raise ValueError("CORAL biases must be a finite vector")

    @classmethod
    def zeros(cls, k):
        return cls(np.zeros(k - 1))

    def logits(self, shared):
        return np.asarray(shared, dtype=np.float64)[..., None] + self.biases

    def is_rank_monotone(self):
        return bool(np.all(np.diff(self.biases) <= 0.0))


def _check_pair_class(i, k):
    if int(i) != i or not 1 <= i <= k - 1:
        raise InvalidPair(f"lower class {i!r} has no upper neighbour among 1..{k}")
    return int(i)


def _hinge(a):
    return a if a > 0.0 else 0.0


def _step(a):
    return 1.0 if a > 0.0 else 0.0


def _sigmoid(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _bce(z, y):
    return max(z, 0.0) - y * z + math.log1p(math.exp(-abs(z)))


# --- threshold ranking loss ---------------------------------------------------


def thor_pair_loss(fi, fj, i, b):
    """Four-hinge loss for a pair drawn from classes ``i`` and ``i+1``.

    ``fi`` should sit in ``[b[i-1]+margin, b[i]-margin]`` and ``fj`` in
    ``[b[i]+margin, b[i+1]-margin]``; each side of each interval is one hinge.
    """
    i = _check_pair_class(i, b.k)
    t, g = b.thresholds, b.margin
    a1 = g + t[i - 1] - fi
    a2 = g - t[i] + fi
    a3 = g + t[i] - fj
    a4 = g - t[i + 1] + fj
    value = (_hinge(a1) + _hinge(a2)) + (_hinge(a3) + _hinge(a4))
    return LossValueAndGrad(value, (_step(a2) - _step(a1), _step(a4) - _step(a3)))


def thor_violation_count(fi, fj, i, b):
    """Number of strictly violated segment constraints (0..4)."""
    i = _check_pair_class(i, b.k)
    t = b.thresholds
    return int(fi < t[i - 1]) + int(fi > t[i]) + int(fj < t[i]) + int(fj > t[i + 1])


def thor_hinge_arguments(fi, fj, lower_class, b):
    """The four hinge arguments per pair, shape ``(n, 4)``; used to spot kinks."""
    t, g = b.array, b.margin
    i = np.asarray(lower_class, dtype=np.int64)
    return np.stack(
        [g + t[i - 1] - fi, g - t[i] + fi, g + t[i] - fj, g - t[i + 1] + fj], axis=-1
    )


def thor_batch(fi, fj, lower_class, b):
    fi = np.asarray(fi, dtype=np.float64)
    lower_class = np.asarray(lower_class, dtype=np.int64)
    if lower_class.size and (lower_class.min() < 1 or lower_class.max() > b.k - 1):
        raise InvalidPair(f"lower classes must lie in 1..{b.k - 1}")
    n = fi.shape[0]
    values, dfi, dfj = kernels.thor_pair_terms(fi, fj, lower_class, b.array, b.margin)
    return LossValueAndGrad(float(values.sum()) / n, (dfi / n, dfj / n))


# --- extended binary baselines -----------------------------------------------


def orcnn_loss(logits, target):
    """Summed sigmoid cross-entropy over the K-1 independent binary tasks."""
    logits = np.asarray(logits, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if logits.shape != target.shape or logits.ndim != 1:
        raise ShapeError(f"logits {logits.shape} and target {target.shape} must be equal-length vectors")
    value = sum(_bce(z, y) for z, y in zip(logits, target))
    grad = np.array([_sigmoid(z) - y for z, y in zip(logits, target)])
    return LossValueAndGrad(value, (grad,))


def orcnn_batch(logits, bits):
    logits = np.asarray(logits, dtype=np.float64)
    if logits.shape != np.shape(bits):
        raise ShapeError(f"logits {logits.shape} vs targets {np.shape(bits)}")
    n = logits.shape[0]
    values, grad = kernels.bce_logits(logits, bits)
    return LossValueAndGrad(float(values.sum()) / n, (grad / n,))


def coral_loss(shared_logit, head, target):
    """Sigmoid cross-entropy on ``shared_logit + bias[k]`` for every task.

    Returns gradients for the shared logit (summed over tasks) and the biases.
    """
    target = np.asarray(target, dtype=np.float64)
    if target.shape != head.biases.shape:
        raise ShapeError(f"{head.biases.size} biases vs target of length {target.size}")
    z = float(shared_logit) + head.biases
    value = sum(_bce(zk, y) for zk, y in zip(z, target))
    d_bias = np.array([_sigmoid(zk) - y for zk, y in zip(z, target)])
    return LossValueAndGrad(value, (float(d_bias.sum()), d_bias))


def coral_batch(shared, head, bits):
    shared = np.asarray(shared, dtype=np.float64)
    if np.shape(bits) != (shared.shape[0], head.biases.size):
        raise ShapeError("targets do not match CORAL head")
    n = shared.shape[0]
    values, grad = kernels.bce_logits(head.logits(shared), bits)
    grad /= n
    return LossValueAndGrad(float(values.sum()) / n, (grad.sum(axis=1), grad.sum(axis=0)))


# --- classification + ranking -------------------------------------------------


def softmax_cross_entropy(logits, y):
    logits = np.asarray(logits, dtype=np.float64)
    y = check_label(y, logits.shape[0])
    values, grad = kernels.softmax_xent(logits[None, :], np.array([y - 1]))
    return float(values[0]), grad[0]


def cnnpor_loss(class_logits_i, class_logits_j, yi, yj, ri, rj, cfg=CnnporConfig()):
    """Cross-entropy on both pair members plus ``c`` times a pairwise hinge.

    The hinge ``[pair_margin - (rj - ri)]_+`` pushes the upper example's
    regression output above the lower one's.
    """
    if yj != yi + 1:
        raise InvalidPair(f"CNNPOR pairs must be adjacent, got ({yi}, {yj})")
    ci = np.asarray(class_logits_i, dtype=np.float64)
    cj = np.asarray(class_logits_j, dtype=np.float64)
    if ci.shape != cj.shape or ci.ndim != 1:
        raise ShapeError("class logits of both pair members must be equal-length vectors")
    li, gi = softmax_cross_entropy(ci, yi)
    lj, gj = softmax_cross_entropy(cj, yj)
    arg = cfg.pair_margin - (rj - ri)
    l2 = _hinge(arg)
    s = _step(arg) * cfg.c
    return LossValueAndGrad(li + lj + cfg.c * l2, (gi, gj, s, -s))


def cnnpor_batch(cl_lo, cl_hi, lower_class, r_lo, r_hi, cfg=CnnporConfig()):
    lower_class = np.asarray(lower_class, dtype=np.int64)
    n = lower_class.shape[0]
    v_lo, g_lo = kernels.softmax_xent(cl_lo, lower_class - 1)
    v_hi, g_hi = kernels.softmax_xent(cl_hi, lower_class)
    arg = cfg.pair_margin - (np.asarray(r_hi) - np.asarray(r_lo))
    active = (arg > 0.0).astype(np.float64)
    value = (float(v_lo.sum()) + float(v_hi.sum()) + cfg.c * float(np.maximum(arg, 0.0).sum())) / n
    s = cfg.c * active / n
    return LossValueAndGrad(value, (g_lo / n, g_hi / n, s, -s))


def hybrid_loss(class_logits_i, class_logits_j, fi, fj, i, b, c=1.0):
    """Cross-entropy on a classification head plus ``c`` times the threshold
    ranking loss on a regression head, for a pair from classes ``i, i+1``."""
    ci = np.asarray(class_logits_i, dtype=np.float64)
    cj = np.asarray(class_logits_j, dtype=np.float64)
    li, gi = softmax_cross_entropy(ci, i)
    lj, gj = softmax_cross_entropy(cj, i + 1)
    th = thor_pair_loss(fi, fj, i, b)
    d_fi, d_fj = th.d_outputs
    return LossValueAndGrad(li + lj + c * th.value, (gi, gj, c * d_fi, c * d_fj))


def hybrid_batch(cl_lo, cl_hi, f_lo, f_hi, lower_class, b, c=1.0):
    lower_class = np.asarray(lower_class, dtype=np.int64)
    n = lower_class.shape[0]
    v_lo, g_lo = kernels.softmax_xent(cl_lo, lower_class - 1)
    v_hi, g_hi = kernels.softmax_xent(cl_hi, lower_class)
    th = thor_batch(f_lo, f_hi, lower_class, b)
    value = (float(v_lo.sum()) + float(v_hi.sum())) / n + c * th.value
    return LossValueAndGrad(value, (g_lo / n, g_hi / n, c * th.d_outputs[0], c * th.d_outputs[1]))
