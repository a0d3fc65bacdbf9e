"""Adjacent-class pair stream for the Siamese objectives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import OrdinalDataset
from .errors import UncoverableClass


@dataclass(frozen=True)
class PairSample:
    lower_features: np.ndarray
    upper_features: np.ndarray
    lower_class: int


@dataclass
class EpochPairs:
    """One epoch of pairs as index arrays into ``ds``."""

    ds: OrdinalDataset
    lower_index: np.ndarray
    upper_index: np.ndarray
    lower_class: np.ndarray

    def __len__(self):
        return self.lower_index.shape[0]

    def __iter__(self) -> Iterator[PairSample]:
        X = self.ds.features
        for lo, hi, c in zip(self.lower_index, self.upper_index, self.lower_class):
            yield PairSample(X[lo], X[hi], int(c))

    def batches(self, batch_size):
        """Yield ``(X_lower, X_upper, lower_class)`` mini-batches in order."""
        X = self.ds.features
        for s in range(0, len(self), batch_size):
            sl = slice(s, s + batch_size)
            yield X[self.lower_index[sl]], X[self.upper_index[sl]], self.lower_class[sl]


def _draw(rng, members, count):
    # every member once (shuffled), padded by with-replacement draws
    if count <= members.size:
        return rng.permutation(members)[:count]
    pad = rng.choice(members, size=count - members.size, replace=True)
    return rng.permutation(np.concatenate([members, pad]))


def epoch_pairs(ds, seed):
    """Pairs ``(x_i, x_{i+1})`` for every adjacent class slot ``(i, i+1)``.

    Each slot contributes ``max(n_i, n_{i+1})`` pairs: the larger class is
    walked once without replacement and the smaller class is cycled through
    once then topped up with replacement, so every example lands in every
    slot it borders. Pair order is shuffled globally.
    """
    counts = ds.class_counts()
    missing = [c + 1 for c in np.flatnonzero(counts == 0)]
    if missing:
        raise UncoverableClass(missing, "the pair sampler's input")
    rng = np.random.default_rng(seed)
    members = [ds.indices_of(r) for r in range(1, ds.k + 1)]
    lows, highs, classes = [], [], []
    for i in range(1, ds.k):
        a, b = members[i - 1], members[i]
        m = max(a.size, b.size)
        lows.append(_draw(rng, a, m))
        highs.append(_draw(rng, b, m))
        classes.append(np.full(m, i, dtype=np.int64))
    lo, hi, cl = np.concatenate(lows), np.concatenate(highs), np.concatenate(classes)
    order = rng.permutation(lo.size)
    return EpochPairs(ds, lo[order], hi[order], cl[order])
