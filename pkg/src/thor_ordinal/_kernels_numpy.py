"""Pure-numpy implementations of the hot per-example loops.

Every function here has a twin in ``_kernels_numba`` with the same signature
and semantics; ``kernels`` picks one at import time.
"""
import numpy as np


def thor_pair_terms(fi, fj, lower_class, thresholds, gamma):
    """Per-pair four-hinge loss and its subgradients w.r.t. both scores.

    ``lower_class`` holds 1-based ranks; pair ``p`` uses thresholds
    ``lower_class[p]-1 .. lower_class[p]+1``.
    """
    i = lower_class
    lo, mid, hi = thresholds[i - 1], thresholds[i], thresholds[i + 1]
    a1 = gamma + lo - fi
    a2 = gamma - mid + fi
    a3 = gamma + mid - fj
    a4 = gamma - hi + fj
    values = (np.maximum(a1, 0.0) + np.maximum(a2, 0.0)) + (np.maximum(a3, 0.0) + np.maximum(a4, 0.0))
    dfi = (a2 > 0.0).astype(np.float64) - (a1 > 0.0)
    dfj = (a4 > 0.0).astype(np.float64) - (a3 > 0.0)
    return values, dfi, dfj


def thor_violations(fi, fj, lower_class, thresholds):
    i = lower_class
    lo, mid, hi = thresholds[i - 1], thresholds[i], thresholds[i + 1]
    out = (fi < lo).astype(np.int64)
    out += fi > mid
    out += fj < mid
    out += fj > hi
    return out


def threshold_ranks(scores, thresholds):
    # half-open segments (b[i-1], b[i]]; clamp outside [b0, bK]
    k = thresholds.shape[0] - 1
    idx = np.searchsorted(thresholds, scores, side="left")
    return np.clip(idx, 1, k).astype(np.int64)


def bce_logits(logits, bits):
    """Row-wise summed sigmoid cross-entropy and gradient w.r.t. logits."""
    z = logits
    values = (np.maximum(z, 0.0) - bits * z + np.log1p(np.exp(-np.abs(z)))).sum(axis=1)
    ez = np.exp(-np.abs(z))
    sig = np.where(z >= 0, 1.0 / (1.0 + ez), ez / (1.0 + ez))
    return values, sig - bits


def softmax_xent(logits, labels0):
    """Row-wise softmax cross-entropy; ``labels0`` are 0-based class indices."""
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e.sum(axis=1)
    rows = np.arange(n)
    values = np.log(s) - shifted[rows, labels0]
    grad = e / s[:, None]
    grad[rows, labels0] -= 1.0
    return values, grad


def inconsistent_rows(decisions):
    """True for rows holding a 0 followed later by a 1."""
    d = np.asarray(decisions)
    if d.shape[1] < 2:
        return np.zeros(d.shape[0], dtype=np.bool_)
    return np.any(d[:, 1:] > d[:, :-1], axis=1)


def relu_backward(grad, pre):
    return np.where(pre > 0.0, grad, 0.0)
