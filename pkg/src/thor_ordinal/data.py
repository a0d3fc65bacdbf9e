"""Synthetic ordinal data, CSV ingestion and stratified splitting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import OrdinalDataset, check_class_count
from .errors import CsvParseError, InvalidLabel, UncoverableClass


@dataclass(frozen=True)
class SyntheticSpec:
    k: int = 5
    per_class: int = 200
    d: int = 8
    noise: float = 0.5
    transform_seed: int = 0
    label_noise: float = 0.0
    # draws latents, distractors and label corruption
    seed: int = 0

    def __post_init__(self):
        check_class_count(self.k)
        if self.per_class < 1 or self.d < 1:
            raise ValueError("per_class and d must be >= 1")
        if not self.noise >= 0:
            raise ValueError("noise must be >= 0")
        if not 0.0 <= self.label_noise <= 0.5:
            raise ValueError("label_noise must lie in [0, 0.5]")


def class_centers(k):
    """Midpoints of the unit segments ``(i-2, i-1]``, i.e. ``i - 1.5``."""
    return np.arange(1, k + 1, dtype=np.float64) - 1.5


def embedding(d, transform_seed):
    """Fixed random orthogonal ``d x d`` matrix."""
    rng = np.random.default_rng(transform_seed)
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def generate_synthetic(spec):
    """Latent ~ Normal(center_y, noise); features rotate [latent, distractors]."""
    rng = np.random.default_rng(spec.seed)
    k, n_per = spec.k, spec.per_class
    labels = np.repeat(np.arange(1, k + 1), n_per)
    latent = class_centers(k)[labels - 1] + spec.noise * rng.standard_normal(labels.size)
    raw = np.column_stack([latent, rng.standard_normal((labels.size, spec.d - 1))])
    features = raw @ embedding(spec.d, spec.transform_seed).T
    if spec.label_noise > 0:
        flip = rng.random(labels.size) < spec.label_noise
        step = rng.choice(np.array([-1, 1]), size=labels.size)
        labels = np.where(flip, np.clip(labels + step, 1, k), labels)
    return OrdinalDataset(features, labels, k, latent)


def bayes_threshold_oracle(k, noise, thresholds=None):
    """Expected accuracy and MAE of thresholding the latent itself.

    Closed form from Gaussian interval masses; class priors are uniform and
    the outer segments are open-ended.
    """
    if thresholds is None:
        thresholds = np.arange(k + 1, dtype=np.float64) - 1.0
    cuts = np.array(thresholds, dtype=np.float64)
    cuts[0], cuts[-1] = -np.inf, np.inf
    acc = mae = 0.0
    for i, c in enumerate(class_centers(k), start=1):
        if noise == 0:
            cdf = (cuts >= c).astype(np.float64)
        else:
            cdf = np.array([0.5 * (1.0 + math.erf((t - c) / (noise * math.sqrt(2.0)))) for t in cuts])
        mass = np.diff(cdf)
        acc += float(mass[i - 1]) / k
        mae += float(np.abs(np.arange(1, k + 1) - i) @ mass) / k
    return acc, mae


def save_csv(ds, path, header=True):
    lines = []
    if header:
        lines.append(",".join([f"f{j + 1}" for j in range(ds.d)] + ["label"]))
    for row, y in zip(ds.features, ds.labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{int(y)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _looks_like_header(cells):
    try:
        [float(c) for c in cells]
    except ValueError:
        return True
    return False


def load_csv(path, k, header=None):
    """Read ``f1,...,fd,label`` rows. ``header=None`` sniffs the first row."""
    k = check_class_count(k)
    rows, labels = [], []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            if lineno == 1 and (header or (header is None and _looks_like_header(cells))):
                continue
            if len(cells) < 2:
                raise CsvParseError(lineno, "need at least one feature and a label")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise CsvParseError(lineno, f"expected {width} fields, found {len(cells)}")
            try:
                feats = [float(c) for c in cells[:-1]]
            except ValueError as exc:
                raise CsvParseError(lineno, f"non-numeric feature ({exc})") from None
            try:
                y = float(cells[-1])
            except ValueError:
                raise CsvParseError(lineno, f"non-numeric label {cells[-1]!r}") from None
            if y != int(y) or not 1 <= y <= k:
                raise InvalidLabel(f"{path}: line {lineno}: label {cells[-1]} outside 1..{k}")
            rows.append(feats)
            labels.append(int(y))
    if not rows:
        raise CsvParseError(0, "no data rows")
    return OrdinalDataset(np.array(rows, dtype=np.float64), np.array(labels), k)


def _largest_remainder(n, ratios):
    quotas = [r * n for r in ratios]
    sizes = [int(math.floor(q)) for q in quotas]
    rest = n - sum(sizes)
    # ties resolved in split order: train, val, test
    order = sorted(range(len(ratios)), key=lambda j: (-(quotas[j] - sizes[j]), j))
    for j in order[:rest]:
        sizes[j] += 1
    return sizes


def split(ds, ratios=(0.6, 0.2, 0.2), seed=0):
    """Stratified train/val/test split with largest-remainder rounding."""
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three positive numbers summing to 1, got {ratios}")
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    empty_train = []
    for r in range(1, ds.k + 1):
        idx = rng.permutation(ds.indices_of(r))
        sizes = _largest_remainder(idx.size, ratios)
        if sizes[0] == 0:
            empty_train.append(r)
        start = 0
        for part, size in zip(parts, sizes):
            part.append(idx[start:start + size])
            start += size
    if empty_train:
        raise UncoverableClass(empty_train, "the training split")
    return tuple(ds.subset(np.sort(np.concatenate(p))) for p in parts)
