"""Dataset container, pairwise distances and nearest-neighbour tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform


class ParameterError(ValueError):
    """Raised when an algorithm parameter is outside its valid range."""


@dataclass(frozen=True)
class Dataset:
    """Dense real-valued objects with optional ground-truth labels.

    ``objects`` is an ``(m, d)`` float array; ``labels`` (when given) has
    length ``m`` and is only used for evaluation.
    """

    objects: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        X = np.array(self.objects, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValueError(f"objects must be a 2-D array, got {X.ndim} dimensions")
        m, d = X.shape
        if m < 2:
            raise ValueError(f"a dataset needs at least 2 objects, got {m}")
        if d < 1:
            raise ValueError("a dataset needs at least 1 attribute")
        if not np.all(np.isfinite(X)):
            bad = np.argwhere(~np.isfinite(X))[0]
            raise ValueError(f"non-finite coordinate at object {bad[0]}, attribute {bad[1]}")
        X.setflags(write=False)
        object.__setattr__(self, "objects", X)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (m,):
                raise ValueError(f"labels must have length {m}, got shape {y.shape}")
            y = y.copy()
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)

    @property
    def m(self) -> int:
        return self.objects.shape[0]

    @property
    def d(self) -> int:
        return self.objects.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    dis: np.ndarray
    dmax: float

    @property
    def m(self) -> int:
        return self.dis.shape[0]


@dataclass(frozen=True)
class KnnTable:
    """Per-object neighbour lists over the whole dataset.

    ``neighbors[h]`` holds the other ``m - 1`` objects by ascending
    distance to ``h``; only the first ``L`` count towards connectivity.
    """

    neighbors: np.ndarray
    L: int
    _membership: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def m(self) -> int:
        return self.neighbors.shape[0]

    @property
    def nearest(self) -> np.ndarray:
        """``(m, L)`` array of the L nearest neighbours of every object."""
        return self.neighbors[:, : self.L]

    @property
    def membership(self) -> np.ndarray:
        """Boolean ``(m, m)`` matrix, ``[h, e]`` true iff e is among h's L nearest."""
        if self._membership is None:
            A = np.zeros((self.m, self.m), dtype=bool)
            A[np.arange(self.m)[:, None], self.nearest] = True
            A.setflags(write=False)
            object.__setattr__(self, "_membership", A)
        return self._membership


def build_distance_matrix(data: Dataset) -> DistanceMatrix:
    dis = squareform(pdist(data.objects, metric="euclidean"))
    dis.setflags(write=False)
    return DistanceMatrix(dis=dis, dmax=float(dis.max()))


def knn_table(dm: DistanceMatrix, L: int) -> KnnTable:
    """Rank every object's neighbours; ties go to the lower object index."""
    m = dm.m
    if not 1 <= L <= m - 1:
        raise ParameterError(f"L must lie in [1, {m - 1}], got {L}")
    # stable sort keeps ascending index order among equal distances;
    # self sits at distance 0 but may tie with duplicates, so drop it explicitly
    order = np.argsort(dm.dis, axis=1, kind="stable")
    rows = [row[row != h] for h, row in enumerate(order)]
    neighbors = np.vstack(rows)
    neighbors.setflags(write=False)
    return KnnTable(neighbors=neighbors, L=int(L))


def min_max_params(X: np.ndarray) -> tuple:
    """Per-attribute offset and span; constant attributes get span 0."""
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0)
    return lo, X.max(axis=0) - lo


def apply_min_max(X: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    scaled = np.zeros_like(X)
    varying = span > 0
    scaled[:, varying] = (X[:, varying] - lo[varying]) / span[varying]
    return scaled


def min_max_normalize(data: Dataset) -> Dataset:
    """Map every attribute affinely onto [0, 1]; constant attributes become 0."""
    lo, span = min_max_params(data.objects)
    return Dataset(apply_min_max(data.objects, lo, span), data.labels)
