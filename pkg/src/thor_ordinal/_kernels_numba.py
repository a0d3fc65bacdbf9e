"""Numba-compiled twins of ``_kernels_numpy``. Loops are explicit on purpose."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def thor_pair_terms(fi, fj, lower_class, thresholds, gamma):
    n = fi.shape[0]
    values = np.empty(n)
    dfi = np.empty(n)
    dfj = np.empty(n)
    for p in range(n):
        i = lower_class[p]
        lo = thresholds[i - 1]
        mid = thresholds[i]
        hi = thresholds[i + 1]
        a1 = gamma + lo - fi[p]
        a2 = gamma - mid + fi[p]
        a3 = gamma + mid - fj[p]
        a4 = gamma - hi + fj[p]
        v = (max(a1, 0.0) + max(a2, 0.0)) + (max(a3, 0.0) + max(a4, 0.0))
        g1 = 0.0
        if a2 > 0.0:
            g1 += 1.0
        if a1 > 0.0:
            g1 -= 1.0
        g2 = 0.0
        if a4 > 0.0:
            g2 += 1.0
        if a3 > 0.0:
            g2 -= 1.0
        values[p] = v
        dfi[p] = g1
        dfj[p] = g2
    return values, dfi, dfj


@njit(cache=True)
def thor_violations(fi, fj, lower_class, thresholds):
    n = fi.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for p in range(n):
        i = lower_class[p]
        c = 0
        if fi[p] < thresholds[i - 1]:
            c += 1
        if fi[p] > thresholds[i]:
            c += 1
        if fj[p] < thresholds[i]:
            c += 1
        if fj[p] > thresholds[i + 1]:
            c += 1
        out[p] = c
    return out


@njit(cache=True)
def threshold_ranks(scores, thresholds):
    k = thresholds.shape[0] - 1
    n = scores.shape[0]
    out = np.empty(n, dtype=np.int64)
    for p in range(n):
        s = scores[p]
        r = k
        for i in range(1, k + 1):
            if s <= thresholds[i]:
                r = i
                break
        out[p] = r
    return out


@njit(cache=True)
def bce_logits(logits, bits):
    n, m = logits.shape
    values = np.zeros(n)
    grad = np.empty((n, m))
    for r in range(n):
        acc = 0.0
        for c in range(m):
            z = logits[r, c]
            y = bits[r, c]
            ez = math.exp(-abs(z))
            acc += max(z, 0.0) - y * z + math.log1p(ez)
            if z >= 0:
                s = 1.0 / (1.0 + ez)
            else:
                s = ez / (1.0 + ez)
            grad[r, c] = s - y
        values[r] = acc
    return values, grad


@njit(cache=True)
def softmax_xent(logits, labels0):
    n, k = logits.shape
    values = np.empty(n)
    grad = np.empty((n, k))
    for r in range(n):
        mx = logits[r, 0]
        for c in range(1, k):
            if logits[r, c] > mx:
                mx = logits[r, c]
        s = 0.0
        for c in range(k):
            e = math.exp(logits[r, c] - mx)
            grad[r, c] = e
            s += e
        for c in range(k):
            grad[r, c] /= s
        y = labels0[r]
        values[r] = math.log(s) - (logits[r, y] - mx)
        grad[r, y] -= 1.0
    return values, grad


@njit(cache=True)
def inconsistent_rows(decisions):
    n, m = decisions.shape
    out = np.zeros(n, dtype=np.bool_)
    for r in range(n):
        seen_zero = False
        for c in range(m):
            if decisions[r, c] == 0:
                seen_zero = True
            elif seen_zero:
                out[r] = True
                break
    return out


@njit(cache=True)
def relu_backward(grad, pre):
    out = np.empty_like(grad)
    flat_g = grad.ravel()
    flat_p = pre.ravel()
    flat_o = out.ravel()
    for t in range(flat_g.shape[0]):
        flat_o[t] = flat_g[t] if flat_p[t] > 0.0 else 0.0
    return out
