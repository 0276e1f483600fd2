"""Plain Lloyd k-means, kept as a comparison baseline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..data import Dataset, ParameterError


def _lloyd(X: np.ndarray, k: int, seed: int, max_iters: int):
    m = X.shape[0]
    if not 1 <= k <= m:
        raise ParameterError(f"k must lie in [1, {m}], got {k}")
    rng = np.random.default_rng(seed)
    centers = X[rng.choice(m, size=k, replace=False)].copy()
    labels = np.full(m, -1)
    for _ in range(max_iters):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(d2, axis=1)
        sizes = np.bincount(new, minlength=k)
        for j in np.flatnonzero(sizes == 0):
            # reseed an empty cluster with the point worst served by its centre
            own = d2[np.arange(m), new]
            far = int(np.argmax(np.where(sizes[new] > 1, own, -np.inf)))
            sizes[new[far]] -= 1
            new[far] = j
            sizes[j] = 1
            d2[far] = np.inf
            d2[far, j] = 0.0
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            centers[j] = X[labels == j].mean(axis=0)
    return labels, centers


def kmeans_baseline(data: Dataset, k: int, seed: int = 0, max_iters: int = 100) -> np.ndarray:
    """Cluster labels from Lloyd iterations started at ``k`` random distinct objects."""
    labels, _ = _lloyd(data.objects, int(k), seed, max_iters)
    return labels


class KMeansBaseline(ClusterMixin, BaseEstimator):
    def __init__(self, n_clusters=3, seed=0, max_iters=100):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iters = max_iters

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        self.labels_, self.cluster_centers_ = _lloyd(X, int(self.n_clusters), self.seed, self.max_iters)
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        d2 = ((X[:, None, :] - self.cluster_centers_[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1)
