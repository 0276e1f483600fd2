"""R-square, connectivity and their product, the quantity MOCA-SM maximises.

All weights use the full dataset size ``m`` even while some objects are
still unassigned, so values stay comparable from one round to the next.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .data import Dataset, DistanceMatrix, KnnTable


@dataclass(frozen=True)
class Cluster:
    head: int
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(i) for i in self.members))
        object.__setattr__(self, "head", int(self.head))
        if self.head not in self.members:
            raise ValueError(f"cluster head {self.head} is not one of its members")

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class Clustering:
    """A partition in progress: disjoint non-empty clusters plus an unassigned pool."""

    clusters: tuple
    unassigned: frozenset = frozenset()

    def __post_init__(self):
        clusters = tuple(self.clusters)
        unassigned = frozenset(int(i) for i in self.unassigned)
        seen = set(unassigned)
        for c in clusters:
            if not c.members:
                raise ValueError("clusters must be non-empty")
            if seen & c.members:
                raise ValueError(f"objects {sorted(seen & c.members)} appear twice")
            seen |= c.members
        if seen != set(range(len(seen))):
            raise ValueError("clusters and unassigned pool must cover object ids 0..m-1")
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "unassigned", unassigned)

    @property
    def m(self) -> int:
        return len(self.unassigned) + sum(len(c) for c in self.clusters)

    def labels(self) -> np.ndarray:
        """Cluster index per object, ``-1`` for unassigned objects."""
        out = np.full(self.m, -1, dtype=int)
        for k, c in enumerate(self.clusters):
            out[list(c.members)] = k
        return out

    def with_member(self, k: int, obj: int) -> "Clustering":
        """Copy with ``obj`` moved from the unassigned pool into cluster ``k``."""
        if obj not in self.unassigned:
            raise ValueError(f"object {obj} is already assigned")
        clusters = list(self.clusters)
        c = clusters[k]
        clusters[k] = Cluster(c.head, c.members | {obj})
        return Clustering(tuple(clusters), self.unassigned - {obj})

    @classmethod
    def from_labels(cls, labels: Sequence[int], heads: Sequence[int] | None = None) -> "Clustering":
        """Build from per-object cluster indices (``-1`` = unassigned).

        Without ``heads`` the lowest member id heads each cluster.
        """
        labels = np.asarray(labels, dtype=int)
        ids = sorted(set(labels.tolist()) - {-1})
        clusters = []
        for n, k in enumerate(ids):
            members = np.flatnonzero(labels == k)
            head = int(members[0]) if heads is None else int(heads[n])
            clusters.append(Cluster(head, frozenset(members.tolist())))
        return cls(tuple(clusters), frozenset(np.flatnonzero(labels == -1).tolist()))


@dataclass(frozen=True)
class ObjectiveReport:
    inter_inertia: float
    intra_inertia: float
    r_square: float
    connectivity: float
    phi: float
    gravity_center: np.ndarray


def gravity_center(data) -> np.ndarray:
    """Attribute-wise mean of a :class:`Dataset` or a raw object array."""
    X = np.asarray(getattr(data, "objects", data), dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return X.mean(axis=0)


def inter_inertia(clustering: Clustering, data: Dataset, g: np.ndarray) -> float:
    X = data.objects
    total = 0.0
    for c in clustering.clusters:
        diff = X[c.head] - g
        total += len(c) * float(diff @ diff)
    return total / data.m


def intra_inertia(clustering: Clustering, dm: DistanceMatrix) -> float:
    total = 0.0
    for c in clustering.clusters:
        members = sorted(c.members)
        total += float(np.sum(dm.dis[c.head, members] ** 2))
    return total / dm.m


def _ratio(inter: float, intra: float) -> float:
    denom = inter + intra
    # degenerate clustering: every head sits on g and nothing is spread out
    if denom <= 0:
        return 0.0
    return inter / denom


def r_square(clustering: Clustering, data: Dataset, dm: DistanceMatrix) -> float:
    g = gravity_center(data)
    return _ratio(inter_inertia(clustering, data, g), intra_inertia(clustering, dm))


def _in_cluster_neighbor_count(members: Iterable[int], knn: KnnTable) -> int:
    members = sorted(members)
    nearest = knn.nearest[members]
    return int(np.isin(nearest, members).sum())


def cluster_connectivity(cluster: Cluster, knn: KnnTable) -> float:
    """Mean fraction of each member's L nearest neighbours lying in the cluster."""
    hits = _in_cluster_neighbor_count(cluster.members, knn)
    return hits / (knn.L * len(cluster))


def total_connectivity(clustering: Clustering, knn: KnnTable) -> float:
    m = knn.m
    return sum(len(c) / m * cluster_connectivity(c, knn) for c in clustering.clusters)


def phi(clustering: Clustering, data: Dataset, dm: DistanceMatrix, knn: KnnTable) -> float:
    return r_square(clustering, data, dm) * total_connectivity(clustering, knn)


def objective_report(
    clustering: Clustering, data: Dataset, dm: DistanceMatrix, knn: KnnTable
) -> ObjectiveReport:
    g = gravity_center(data)
    inter = inter_inertia(clustering, data, g)
    intra = intra_inertia(clustering, dm)
    rsq = _ratio(inter, intra)
    conn = total_connectivity(clustering, knn)
    return ObjectiveReport(inter, intra, rsq, conn, rsq * conn, g)


def dissimilarity_vector(dm: DistanceMatrix) -> np.ndarray:
    """Mean distance from each object to all others; low means dense surroundings."""
    m = dm.m
    return dm.dis.sum(axis=1) / (m - 1)
