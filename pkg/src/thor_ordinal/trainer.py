"""Mini-batch SGD over any of the five objectives, with validation-based
model selection and deterministic checkpoints/reports."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import methods, metrics, net
from .core import Boundaries, default_boundaries
from .errors import ConfigError, NumericFault, ShapeError
from .sampler import epoch_pairs

log = logging.getLogger(__name__)

CHECKPOINT_NAME = "best.ckpt"
REPORT_NAME = "report.txt"


@dataclass(frozen=True)
class TrainConfig:
    method: str = "thor"
    epochs: int = 100
    batch_size: int = 32
    lr: float = 0.01
    gamma: float = 0.5
    seed: int = 42
    boundaries: Union[Boundaries, str] = "default"
    hidden: tuple = (64, 32)
    select_on: str = "mae"
    activation: str = "relu"
    c: float = 1.0
    # head used for validation of hybrid models
    head: Optional[str] = None
    allow_infeasible_margin: bool = False

    def __post_init__(self):
        methods.check_method(self.method)
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if not self.lr > 0 or not math.isfinite(self.lr):
            raise ConfigError(f"lr must be a finite positive number, got {self.lr}")
        if not self.gamma >= 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if self.select_on not in ("mae", "accuracy"):
            raise ConfigError(f"select_on must be mae or accuracy, got {self.select_on!r}")
        if self.head is not None and self.head not in methods.HEADS:
            raise ConfigError(f"unknown head {self.head!r}")
        if self.c < 0:
            raise ConfigError("c must be >= 0")
        if not (self.boundaries == "default" or isinstance(self.boundaries, Boundaries)):
            raise ConfigError("boundaries must be 'default' or a Boundaries instance")

    def resolve_boundaries(self, k):
        if self.boundaries == "default":
            b = default_boundaries(k, self.gamma)
        else:
            b = self.boundaries.with_margin(self.gamma)
            if b.k != k:
                raise ConfigError(f"boundaries define {b.k} classes but the data has {k}")
        if self.method in ("thor", "hybrid") and not self.allow_infeasible_margin:
            b.check_margin_feasible()
        return b

    def eval_head(self):
        if self.method == "hybrid":
            return self.head or "regression"
        return self.head


@dataclass
class TrainReport:
    train_loss: list = field(default_factory=list)
    val_accuracy: list = field(default_factory=list)
    val_mae: list = field(default_factory=list)
    best_epoch: int = 0  # 1-based
    best_checkpoint: Optional[Path] = None
    predictor: Optional[methods.Predictor] = field(default=None, repr=False, compare=False)

    def lines(self):
        out = [
            f"epoch={e} train_loss={tl!r} val_mae={vm!r} val_acc={va!r}"
            for e, (tl, vm, va) in enumerate(zip(self.train_loss, self.val_mae, self.val_accuracy), start=1)
        ]
        out.append(f"best_epoch={self.best_epoch}")
        return out

    def write(self, path):
        Path(path).write_text("\n".join(self.lines()) + "\n", encoding="utf-8")


def evaluate(predictor, ds, head=None):
    """Metrics for ``predictor`` on ``ds`` using its method's inference rule."""
    if ds.d != predictor.model.input_dim:
        raise ShapeError(f"model expects {predictor.model.input_dim} features, data has {ds.d}")
    preds, decisions = predictor.predict(ds.features, head)
    return metrics.report(preds, ds.labels, decisions)


def _run_epoch(p, ds, cfg, epoch_seed, epoch):
    total, seen = 0.0, 0
    if p.method in methods.PAIRWISE:
        batches = epoch_pairs(ds, epoch_seed).batches(cfg.batch_size)
        step = lambda b: methods.pair_objective(p, *b)
    else:
        order = np.random.default_rng(epoch_seed).permutation(len(ds))
        batches = (
            (ds.features[idx], ds.labels[idx])
            for idx in (order[s:s + cfg.batch_size] for s in range(0, order.size, cfg.batch_size))
        )
        step = lambda b: methods.point_objective(p, *b)
    for bi, batch in enumerate(batches):
        res = step(batch)
        if not math.isfinite(res.value):
            raise NumericFault(f"epoch {epoch} batch {bi}: non-finite loss")
        try:
            net.sgd_step(p.model, res.grads, cfg.lr)
        except NumericFault as exc:
            raise NumericFault(f"epoch {epoch} batch {bi}: {exc}") from None
        if res.d_bias is not None:
            if not np.all(np.isfinite(res.d_bias)):
                raise NumericFault(f"epoch {epoch} batch {bi}: non-finite bias gradient")
            p.coral.biases -= cfg.lr * res.d_bias
        n = batch[0].shape[0]
        total += res.value * n
        seen += n
    return total / seen


def _better(metric, candidate, best):
    return candidate < best if metric == "mae" else candidate > best


def train(ds_train, ds_val, cfg, out_dir=None):
    """Train ``cfg.method`` for ``cfg.epochs`` epochs; keep the best validation epoch.

    With ``out_dir`` set, the best model goes to ``best.ckpt`` and the
    per-epoch series to ``report.txt``.
    """
    if ds_train.d != ds_val.d or ds_train.k != ds_val.k:
        raise ShapeError("train and validation sets disagree on feature width or class count")
    b = cfg.resolve_boundaries(ds_train.k)
    p = methods.Predictor.initial(cfg.method, ds_train.d, ds_train.k, cfg.hidden, cfg.seed, b, cfg.activation, cfg.c)
    rng = np.random.default_rng(cfg.seed)
    report = TrainReport()
    best_value, best = None, None
    for epoch in range(1, cfg.epochs + 1):
        loss = _run_epoch(p, ds_train, cfg, int(rng.integers(2**63)), epoch)
        m = evaluate(p, ds_val, cfg.eval_head())
        report.train_loss.append(loss)
        report.val_accuracy.append(m.accuracy)
        report.val_mae.append(m.mae)
        score = m.mae if cfg.select_on == "mae" else m.accuracy
        if best_value is None or _better(cfg.select_on, score, best_value):
            best_value, best, report.best_epoch = score, p.copy(), epoch
        log.debug("epoch %d loss %.5f val_mae %.4f val_acc %.4f", epoch, loss, m.mae, m.accuracy)
    report.predictor = best
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        best.save(out / CHECKPOINT_NAME)
        report.best_checkpoint = out / CHECKPOINT_NAME
        report.write(out / REPORT_NAME)
    return report
