"""Small fully connected network with a hand-written backward pass.

Hidden layers use the configured activation; the output layer is affine.
Weights are stored ``(out, in)`` so a batch forward is ``X @ W.T + b``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InvalidArchitecture, NumericFault, ShapeError, StaleTape

ACTIVATIONS = ("relu", "tanh", "identity")
CHECKPOINT_HEADER = "thor-ckpt v1"


@dataclass
class DenseModel:
    weights: list
    biases: list
    activation: str = "relu"
    # bumped by every in-place update; tapes remember the value they saw
    version: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise InvalidArchitecture(f"unknown activation {self.activation!r}")
        if not self.weights or len(self.weights) != len(self.biases):
            raise InvalidArchitecture("need one bias per weight matrix and at least one layer")
        prev = None
        for w, b in zip(self.weights, self.biases):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise InvalidArchitecture(f"bad layer shapes {w.shape} / {b.shape}")
            if prev is not None and w.shape[1] != prev:
                raise InvalidArchitecture(f"layer expects {w.shape[1]} inputs but previous layer emits {prev}")
            prev = w.shape[0]

    @property
    def input_dim(self):
        return self.weights[0].shape[1]

    @property
    def output_width(self):
        return self.weights[-1].shape[0]

    @property
    def hidden(self):
        return [w.shape[0] for w in self.weights[:-1]]

    def n_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def params(self):
        """Parameter arrays in checkpoint order: W1, b1, W2, b2, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self):
        return DenseModel([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.activation)


@dataclass
class GradientBuffer:
    weights: list
    biases: list

    @classmethod
    def zeros_like(cls, model):
        return cls([np.zeros_like(w) for w in model.weights], [np.zeros_like(b) for b in model.biases])

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def zero(self):
        for g in self.params():
            g.fill(0.0)

    def add_(self, other):
        for a, b in zip(self.params(), other.params()):
            a += b
        return self

    def all_finite(self):
        return all(np.all(np.isfinite(g)) for g in self.params())


@dataclass
class Tape:
    inputs: list  # input to each layer
    pre: list  # pre-activation of each hidden layer
    version: int
    squeezed: bool


def init_model(d, hidden, output_width, seed, activation="relu"):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases."""
    widths = [d, *hidden, output_width]
    if any(int(w) != w or w < 1 for w in widths):
        raise InvalidArchitecture(f"all widths must be positive integers, got {widths}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths, widths[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return DenseModel(weights, biases, activation)


def _activate(z, activation):
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "tanh":
        return np.tanh(z)
    return z


def forward(m, x):
    """Evaluate the model on one vector or a batch of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    squeezed = x.ndim == 1
    a = x[None, :] if squeezed else x
    if a.ndim != 2 or a.shape[1] != m.input_dim:
        raise ShapeError(f"model expects inputs of width {m.input_dim}, got shape {x.shape}")
    inputs, pre = [], []
    last = len(m.weights) - 1
    for ell, (w, b) in enumerate(zip(m.weights, m.biases)):
        inputs.append(a)
        z = a @ w.T + b
        if ell < last:
            pre.append(z)
            a = _activate(z, m.activation)
        else:
            a = z
    tape = Tape(inputs, pre, m.version, squeezed)
    return (a[0] if squeezed else a), tape


def backward(m, tape, d_outputs):
    """Parameter gradients given the upstream gradient on the outputs.

    Contributions from batch rows are summed; callers that average a loss
    over the batch must already have scaled ``d_outputs``.
    """
    if tape.version != m.version:
        raise StaleTape("model changed since this tape was recorded")
    g = np.asarray(d_outputs, dtype=np.float64)
    if tape.squeezed:
        g = g[None, :]
    if g.shape != (tape.inputs[0].shape[0], m.output_width):
        raise ShapeError(f"upstream gradient shape {g.shape} does not match outputs")
    grads = GradientBuffer.zeros_like(m)
    for ell in range(len(m.weights) - 1, -1, -1):
        grads.weights[ell] = g.T @ tape.inputs[ell]
        grads.biases[ell] = g.sum(axis=0)
        if ell == 0:
            break
        g = g @ m.weights[ell]
        z = tape.pre[ell - 1]
        if m.activation == "relu":
            g = kernels.relu_backward(g, z)
        elif m.activation == "tanh":
            g = g * (1.0 - np.tanh(z) ** 2)
    return grads


def sgd_step(m, g, lr):
    if not lr > 0:
        raise ValueError(f"learning rate must be > 0, got {lr}")
    if len(g.weights) != len(m.weights) or any(a.shape != b.shape for a, b in zip(g.params(), m.params())):
        raise ShapeError("gradient buffer does not match model")
    if not g.all_finite():
        raise NumericFault("non-finite gradient")
    with np.errstate(over="ignore", invalid="ignore"):
        for p, dp in zip(m.params(), g.params()):
            p -= lr * dp
    m.version += 1
    if not all(np.all(np.isfinite(p)) for p in m.params()):
        raise NumericFault("parameters became non-finite")


def _fmt(values):
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def save_checkpoint(path, m, meta=None, extra=()):
    """Write the text checkpoint.

    Layout: header, architecture line, ``meta`` line of ``key=value`` pairs,
    then one line per tensor (model params, then ``extra``), row-major.
    """
    hidden = ",".join(str(h) for h in m.hidden) or "-"
    meta = dict(meta or {})
    meta["extra"] = str(len(extra))
    lines = [
        CHECKPOINT_HEADER,
        f"{m.input_dim} {hidden} {m.output_width} {m.activation}",
        "meta " + " ".join(f"{k}={v}" for k, v in meta.items()),
    ]
    lines.extend(_fmt(p) for p in m.params())
    lines.extend(_fmt(e) for e in extra)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_checkpoint(path):
    """Inverse of ``save_checkpoint``; returns ``(model, meta, extra)``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != CHECKPOINT_HEADER:
        raise ValueError(f"{path}: not a '{CHECKPOINT_HEADER}' checkpoint")
    try:
        d_str, hidden_str, out_str, activation = lines[1].split()
        d, out = int(d_str), int(out_str)
        hidden = [] if hidden_str == "-" else [int(h) for h in hidden_str.split(",")]
        meta_tokens = lines[2].split()
        if meta_tokens[0] != "meta":
            raise ValueError("missing meta line")
        meta = dict(tok.split("=", 1) for tok in meta_tokens[1:])
        n_extra = int(meta.pop("extra", "0"))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed checkpoint header ({exc})") from exc
    widths = [d, *hidden, out]
    tensors = [np.array([float(v) for v in ln.split()], dtype=np.float64) for ln in lines[3:]]
    n_layers = len(widths) - 1
    if len(tensors) != 2 * n_layers + n_extra:
        raise ValueError(f"{path}: expected {2 * n_layers + n_extra} tensor lines, found {len(tensors)}")
    weights, biases = [], []
    for ell, (fan_in, fan_out) in enumerate(zip(widths, widths[1:])):
        w, b = tensors[2 * ell], tensors[2 * ell + 1]
        if w.size != fan_in * fan_out or b.size != fan_out:
            raise ValueError(f"{path}: layer {ell} tensor sizes do not match architecture")
        weights.append(w.reshape(fan_out, fan_in))
        biases.append(b)
    return DenseModel(weights, biases, activation), meta, tensors[2 * n_layers:]
