"""External validity indices: purity, (adjusted) Rand index, F-measure, entropy.

Partitions are given as per-object label arrays (any hashable labels).
Pair-based indices count unordered object pairs; the adjusted Rand index
and entropy work from the cluster-by-class contingency table.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class PairCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class ContingencyTable:
    """``counts[j, i]`` objects of true class ``i`` in predicted cluster ``j``."""

    counts: np.ndarray

    @classmethod
    def from_labels(cls, predicted, truth) -> "ContingencyTable":
        predicted, truth = _check_pair(predicted, truth)
        _, p = np.unique(predicted, return_inverse=True)
        _, t = np.unique(truth, return_inverse=True)
        counts = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
        np.add.at(counts, (p, t), 1)
        return cls(counts)

    @property
    def cluster_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def class_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def pair_counts(self) -> PairCounts:
        """Pair counts derived from the table instead of by enumeration."""
        both = int(_comb2(self.counts).sum())
        same_cluster = int(_comb2(self.cluster_sizes).sum())
        same_class = int(_comb2(self.class_sizes).sum())
        n = self.total
        tp = both
        fp = same_cluster - both
        fn = same_class - both
        tn = n * (n - 1) // 2 - tp - fp - fn
        return PairCounts(tp, tn, fp, fn)


@dataclass(frozen=True)
class MetricsReport:
    purity: float
    rand_index: float
    adjusted_rand_index: float
    precision: float
    recall: float
    f_measure: float
    entropy: float

    def as_dict(self) -> dict:
        return asdict(self)


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def _check_pair(predicted, truth):
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.ndim != 1 or truth.ndim != 1:
        raise ValueError("label arrays must be one-dimensional")
    if predicted.shape != truth.shape:
        raise ValueError(
            f"predicted and true labels differ in length: {predicted.size} vs {truth.size}"
        )
    if predicted.size == 0:
        raise ValueError("label arrays are empty")
    return predicted, truth


def pair_counts(predicted, truth) -> PairCounts:
    """Classify every unordered object pair by exhaustive enumeration."""
    predicted, truth = _check_pair(predicted, truth)
    _, p = np.unique(predicted, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    i, j = np.triu_indices(p.size, k=1)
    same_cluster = p[i] == p[j]
    same_class = t[i] == t[j]
    tp = int(np.count_nonzero(same_cluster & same_class))
    fp = int(np.count_nonzero(same_cluster & ~same_class))
    fn = int(np.count_nonzero(~same_cluster & same_class))
    tn = int(i.size) - tp - fp - fn
    return PairCounts(tp, tn, fp, fn)


def purity(predicted, truth) -> float:
    ct = ContingencyTable.from_labels(predicted, truth)
    return float(ct.counts.max(axis=1).sum() / ct.total)


def rand_index(pc: PairCounts) -> float:
    if pc.total == 0:
        raise ValueError("the Rand index needs at least two objects")
    return (pc.tp + pc.tn) / pc.total


def adjusted_rand_index(ct: ContingencyTable) -> float:
    """Hubert-Arabie adjusted Rand index, evaluated in exact integer arithmetic."""
    n = ct.total
    if n < 2:
        raise ValueError("the adjusted Rand index needs at least two objects")
    index = int(_comb2(ct.counts).sum())
    a = int(_comb2(ct.cluster_sizes).sum())
    b = int(_comb2(ct.class_sizes).sum())
    c = n * (n - 1) // 2
    # (index - a*b/c) / ((a+b)/2 - a*b/c), both scaled by 2c
    num = 2 * (index * c - a * b)
    den = (a + b) * c - 2 * a * b
    if den == 0:
        return 1.0 if num == 0 else 0.0
    return num / den


def precision(pc: PairCounts) -> float:
    denom = pc.tp + pc.fp
    return pc.tp / denom if denom else 0.0


def recall(pc: PairCounts) -> float:
    denom = pc.tp + pc.fn
    return pc.tp / denom if denom else 0.0


def f_measure(pc: PairCounts, w: float = 1.0) -> float:
    if w <= 0:
        raise ValueError(f"w must be positive, got {w}")
    p, r = precision(pc), recall(pc)
    denom = w * w * p + r
    if denom == 0:
        return 0.0
    return (w * w + 1) * p * r / denom


def entropy(ct: ContingencyTable) -> float:
    """Size-weighted class entropy of the clusters, normalised by log(#classes)."""
    k = ct.counts.shape[1]
    if k < 2:
        return 0.0
    sizes = ct.cluster_sizes
    frac = ct.counts / sizes[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(frac > 0, frac * np.log(frac), 0.0)
    per_cluster = -terms.sum(axis=1) / np.log(k)
    return float((sizes / ct.total) @ per_cluster)


def evaluate(predicted, truth, w: float = 1.0) -> MetricsReport:
    ct = ContingencyTable.from_labels(predicted, truth)
    pc = ct.pair_counts()
    return MetricsReport(
        purity=purity(predicted, truth),
        rand_index=rand_index(pc),
        adjusted_rand_index=adjusted_rand_index(ct),
        precision=precision(pc),
        recall=recall(pc),
        f_measure=f_measure(pc, w),
        entropy=entropy(ct),
    )
