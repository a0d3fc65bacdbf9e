"""Dispatch for hot kernels.

The numba path is used when numba imports cleanly and the environment
variable ``THOR_ORDINAL_DISABLE_NUMBA`` is unset or ``0``. Set it to ``1`` to
force the pure-numpy fallback (useful for debugging and for the benchmark).
Callers should always go through this module so inputs get coerced to the
dtypes and layouts the compiled twins expect.
"""
import os

import numpy as np

from . import _kernels_numpy

_flag = os.environ.get("THOR_ORDINAL_DISABLE_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

if _disabled:
    _impl = _kernels_numpy
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _kernels_numpy
        BACKEND = "numpy"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def thor_pair_terms(fi, fj, lower_class, thresholds, gamma):
    return _impl.thor_pair_terms(_f64(fi), _f64(fj), _i64(lower_class), _f64(thresholds), float(gamma))


def thor_violations(fi, fj, lower_class, thresholds):
    return _impl.thor_violations(_f64(fi), _f64(fj), _i64(lower_class), _f64(thresholds))


def threshold_ranks(scores, thresholds):
    return _impl.threshold_ranks(_f64(scores), _f64(thresholds))


def bce_logits(logits, bits):
    return _impl.bce_logits(_f64(logits), _f64(bits))


def softmax_xent(logits, labels0):
    return _impl.softmax_xent(_f64(logits), _i64(labels0))


def inconsistent_rows(decisions):
    return _impl.inconsistent_rows(_i64(decisions))


def relu_backward(grad, pre):
    return _impl.relu_backward(_f64(grad), _f64(pre))
