"""Finite-difference audit of the analytic gradients, method by method.

Parameters whose ±h perturbation flips a rectifier or hinge on/off are
skipped: central differences straddle a kink there and mean nothing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import methods
from .core import default_boundaries


@dataclass(frozen=True)
class GradcheckResult:
    method: str
    max_rel_error: float
    n_checked: int
    n_excluded: int
    n_passed: int

    @property
    def pass_fraction(self):
        return self.n_passed / self.n_checked if self.n_checked else 1.0


def relative_error(analytic, numeric, floor=1e-6):
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def random_problem(method, seed, k=4, d=5, hidden=(6, 5), n=6):
    """A random predictor plus a batch it can be scored on."""
    rng = np.random.default_rng(seed)
    p = methods.Predictor.initial(method, d, k, hidden, seed, default_boundaries(k))
    if p.coral is not None:
        p.coral.biases[:] = np.sort(rng.normal(size=k - 1))[::-1]
    if method in methods.PAIRWISE:
        batch = (rng.normal(size=(n, d)), rng.normal(size=(n, d)), rng.integers(1, k, size=n))
    else:
        batch = (rng.normal(size=(n, d)), rng.integers(1, k + 1, size=n))
    return p, batch


def _objective(p, batch):
    if p.method in methods.PAIRWISE:
        return methods.pair_objective(p, *batch)
    return methods.point_objective(p, *batch)


def _pattern(res):
    masks = [z > 0.0 for z in res.tape.pre]
    return np.concatenate([m.ravel() for m in masks] + [res.hinge_args > 0.0])


def check(method, seed, h=1e-5, tol=1e-4, kink=1e-3, **problem):
    p, batch = random_problem(method, seed, **problem)
    base = _objective(p, batch)
    base_pattern = _pattern(base)
    tensors = list(zip(p.model.params(), base.grads.params()))
    if p.coral is not None:
        tensors.append((p.coral.biases, base.d_bias))
    worst, checked, excluded, passed = 0.0, 0, 0, 0
    for param, grad in tensors:
        flat_p, flat_g = param.reshape(-1), grad.reshape(-1)
        for t in range(flat_p.size):
            orig = flat_p[t]
            flat_p[t] = orig + h
            plus = _objective(p, batch)
            flat_p[t] = orig - h
            minus = _objective(p, batch)
            flat_p[t] = orig
            near_kink = not (
                np.array_equal(_pattern(plus), base_pattern) and np.array_equal(_pattern(minus), base_pattern)
            ) or np.any(np.abs(plus.hinge_args) <= kink) or np.any(np.abs(minus.hinge_args) <= kink)
            if near_kink:
                excluded += 1
                continue
            numeric = (plus.value - minus.value) / (2.0 * h)
            err = relative_error(float(flat_g[t]), numeric)
            worst = max(worst, err)
            checked += 1
            passed += err < tol
    return GradcheckResult(method, worst, checked, excluded, passed)


def check_all(method_names=methods.METHODS, seeds=range(20), **kw):
    """Aggregate ``check`` over seeds for each method."""
    out = {}
    for m in method_names:
        parts = [check(m, s, **kw) for s in seeds]
        out[m] = GradcheckResult(
            m,
            max(r.max_rel_error for r in parts),
            sum(r.n_checked for r in parts),
            sum(r.n_excluded for r in parts),
            sum(r.n_passed for r in parts),
        )
    return out
