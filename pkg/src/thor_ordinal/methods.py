"""Per-method glue between the network outputs, the losses and inference.

Output layouts on the shared trunk:

=======  ===========  ===============================================
method   width        meaning
=======  ===========  ===============================================
thor     1            regression score, read against fixed thresholds
orcnn    k-1          independent binary logits
coral    1            shared logit; k-1 biases live in a ``CoralHead``
cnnpor   k+1          k class logits, then one ranking score
hybrid   k+1          k class logits, then one thresholded score
=======  ===========  ===============================================
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import losses, net
from .core import (
    Boundaries,
    binary_decisions,
    default_boundaries,
    encode_extended_binary_batch,
    infer_rank_binary,
    infer_rank_threshold,
)
from .errors import ConfigError, ShapeError

METHODS = ("thor", "orcnn", "coral", "cnnpor", "hybrid")
PAIRWISE = frozenset({"thor", "cnnpor", "hybrid"})
HEADS = ("classification", "regression")


def check_method(method):
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return method


def output_width(method, k):
    check_method(method)
    return {"thor": 1, "coral": 1, "orcnn": k - 1, "cnnpor": k + 1, "hybrid": k + 1}[method]


def default_head(method):
    return {"cnnpor": "classification", "hybrid": None}.get(method)


@dataclass
class Predictor:
    """A trained (or freshly initialised) model together with how to read it."""

    method: str
    model: net.DenseModel
    boundaries: Boundaries
    coral: Optional[losses.CoralHead] = None
    cnnpor: losses.CnnporConfig = field(default_factory=losses.CnnporConfig)

    def __post_init__(self):
        check_method(self.method)
        if self.model.output_width != output_width(self.method, self.k):
            raise ShapeError(
                f"{self.method} with k={self.k} needs output width "
                f"{output_width(self.method, self.k)}, model has {self.model.output_width}"
            )
        if self.method == "coral" and self.coral is None:
            self.coral = losses.CoralHead.zeros(self.k)

    @property
    def k(self):
        return self.boundaries.k

    @classmethod
    def initial(cls, method, d, k, hidden, seed, boundaries=None, activation="relu", c=1.0):
        b = boundaries if boundaries is not None else default_boundaries(k)
        model = net.init_model(d, hidden, output_width(method, k), seed, activation)
        return cls(method, model, b, cnnpor=losses.CnnporConfig(c=c))

    def copy(self):
        coral = None if self.coral is None else losses.CoralHead(self.coral.biases.copy())
        return Predictor(self.method, self.model.copy(), self.boundaries, coral, self.cnnpor)

    def predict(self, X, head=None):
        """Ranks for each row of ``X`` plus binary decisions for orcnn/coral."""
        out, _ = net.forward(self.model, np.atleast_2d(X))
        k = self.k
        if self.method == "thor":
            return infer_rank_threshold(out[:, 0], self.boundaries), None
        if self.method in ("orcnn", "coral"):
            logits = out if self.method == "orcnn" else self.coral.logits(out[:, 0])
            dec = binary_decisions(logits)
            return infer_rank_binary(dec), dec
        head = head or default_head(self.method)
        if head is None:
            raise ConfigError("hybrid models need an inference head: classification or regression")
        if head not in HEADS:
            raise ConfigError(f"unknown head {head!r}")
        if head == "classification":
            return np.argmax(out[:, :k], axis=1).astype(np.int64) + 1, None
        if self.method == "cnnpor":
            raise ConfigError("cnnpor's ranking output has no thresholds; use the classification head")
        return infer_rank_threshold(out[:, k], self.boundaries), None

    # checkpoint ---------------------------------------------------------------

    def save(self, path):
        meta = {
            "method": self.method,
            "k": str(self.k),
            "thresholds": ",".join(repr(t) for t in self.boundaries.thresholds),
            "margin": repr(self.boundaries.margin),
            "c": repr(self.cnnpor.c),
            "pair_margin": repr(self.cnnpor.pair_margin),
        }
        extra = [self.coral.biases] if self.method == "coral" else []
        net.save_checkpoint(path, self.model, meta, extra)

    @classmethod
    def load(cls, path):
        model, meta, extra = net.load_checkpoint(path)
        try:
            b = Boundaries(tuple(float(t) for t in meta["thresholds"].split(",")), float(meta["margin"]))
            cfg = losses.CnnporConfig(float(meta["c"]), float(meta["pair_margin"]))
            method = meta["method"]
        except KeyError as exc:
            raise ValueError(f"{path}: checkpoint meta lacks {exc}") from exc
        coral = losses.CoralHead(extra[0]) if method == "coral" else None
        return cls(method, model, b, coral, cfg)


@dataclass
class ObjectiveResult:
    value: float
    grads: net.GradientBuffer
    d_bias: Optional[np.ndarray]
    # hinge arguments touched by this batch, for kink screening
    hinge_args: np.ndarray
    tape: net.Tape


def pair_objective(p, X_lo, X_hi, lower_class):
    """Mean pair loss and parameter gradients for a batch of adjacent pairs."""
    n = X_lo.shape[0]
    out, tape = net.forward(p.model, np.vstack([X_lo, X_hi]))
    lo, hi = out[:n], out[n:]
    k = p.k
    d_out = np.zeros_like(out)
    if p.method == "thor":
        r = losses.thor_batch(lo[:, 0], hi[:, 0], lower_class, p.boundaries)
        d_out[:n, 0], d_out[n:, 0] = r.d_outputs
        hinge = losses.thor_hinge_arguments(lo[:, 0], hi[:, 0], lower_class, p.boundaries).ravel()
    elif p.method == "hybrid":
        r = losses.hybrid_batch(lo[:, :k], hi[:, :k], lo[:, k], hi[:, k], lower_class, p.boundaries, p.cnnpor.c)
        d_out[:n, :k], d_out[n:, :k], d_out[:n, k], d_out[n:, k] = r.d_outputs
        hinge = losses.thor_hinge_arguments(lo[:, k], hi[:, k], lower_class, p.boundaries).ravel()
    elif p.method == "cnnpor":
        r = losses.cnnpor_batch(lo[:, :k], hi[:, :k], lower_class, lo[:, k], hi[:, k], p.cnnpor)
        d_out[:n, :k], d_out[n:, :k], d_out[:n, k], d_out[n:, k] = r.d_outputs
        hinge = p.cnnpor.pair_margin - (hi[:, k] - lo[:, k])
    else:
        raise ConfigError(f"{p.method} is not a pairwise method")
    return ObjectiveResult(r.value, net.backward(p.model, tape, d_out), None, hinge, tape)


def point_objective(p, X, labels):
    """Mean per-example loss for the extended-binary methods."""
    out, tape = net.forward(p.model, X)
    bits = encode_extended_binary_batch(labels, p.k)
    if p.method == "orcnn":
        r = losses.orcnn_batch(out, bits)
        d_out, d_bias = r.d_outputs[0], None
    elif p.method == "coral":
        r = losses.coral_batch(out[:, 0], p.coral, bits)
        d_out, d_bias = r.d_outputs[0][:, None], r.d_outputs[1]
    else:
        raise ConfigError(f"{p.method} is a pairwise method")
    return ObjectiveResult(r.value, net.backward(p.model, tape, d_out), d_bias, np.empty(0), tape)
