"""scikit-learn compatible front end for MOCA-SM."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .data import Dataset, apply_min_max, min_max_params
from .pipeline import AUTO, PipelineConfig, run_moca


class MOCASM(ClusterMixin, BaseEstimator):
    """Multi-objective clustering by repeated singleton congestion games.

    Parameters
    ----------
    n_clusters : int, default=3
        Number of final clusters after merging.
    n_neighbors : int or "auto", default="auto"
        Neighbourhood size L used by the connectivity objective. ``"auto"``
        picks 9, 14 or 28 from the dataset size.
    normalize : bool, default=False
        Min-max scale every feature before clustering.
    linkage : {"complete", "single", "average"}, default="complete"
        Inter-cluster distance used when merging.
    refresh_dissimilarity : bool, default=True
        Recompute each candidate's mean distance over the remaining pool
        while picking cluster heads.
    epsilon : float, default=1e-12
        Minimum gain in the objective for an allocation to be kept.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
        Final cluster of every training sample.
    cluster_heads_ : ndarray
        Training-sample index heading each final cluster.
    initial_heads_ : ndarray
        Heads picked before any game was played, in picking order.
    n_neighbors_ : int
        L actually used.
    n_players_ : int
        Requested number of initial heads.
    n_rounds_ : int
        Number of games played.
    result_ : MocaResult
        Full pipeline output including the per-round trace.
    """

    def __init__(
        self,
        n_clusters=3,
        n_neighbors=AUTO,
        normalize=False,
        linkage="complete",
        refresh_dissimilarity=True,
        epsilon=1e-12,
    ):
        self.n_clusters = n_clusters
        self.n_neighbors = n_neighbors
        self.normalize = normalize
        self.linkage = linkage
        self.refresh_dissimilarity = refresh_dissimilarity
        self.epsilon = epsilon

    def _scale(self, X):
        if self.normalize:
            return apply_min_max(X, self.scale_min_, self.scale_span_)
        return X

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        self.n_features_in_ = X.shape[1]
        if self.normalize:
            self.scale_min_, self.scale_span_ = min_max_params(X)
        Xs = self._scale(X)
        config = PipelineConfig(
            final_clusters=self.n_clusters,
            L=self.n_neighbors,
            normalize=False,
            epsilon=self.epsilon,
            linkage=self.linkage,
            refresh_dissimilarity=self.refresh_dissimilarity,
        )
        result = run_moca(Dataset(Xs), config)
        self.result_ = result
        self.labels_ = result.labels
        self.cluster_heads_ = np.array(result.state.heads)
        self.initial_heads_ = np.array(result.heads)
        self.n_neighbors_ = result.L
        self.n_players_ = result.n0
        self.n_rounds_ = len(result.state.trace)
        self._train = Xs
        return self

    def predict(self, X):
        """Label new samples with the cluster of their nearest training sample."""
        check_is_fitted(self, "labels_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but MOCASM was fitted with {self.n_features_in_}"
            )
        Xs = self._scale(X)
        d2 = ((Xs[:, None, :] - self._train[None, :, :]) ** 2).sum(axis=2)
        return self.labels_[np.argmin(d2, axis=1)]
