"""MOCA-SM: player identification, repeated congestion games, merging.

The clustering grows one object per player per round. Every round the
still-active cluster heads play a singleton congestion game over the
unassigned objects; an equilibrium pick is kept only if it raises the
global objective ``phi = R^2 * connectivity``, otherwise the player leaves
the game for good. Surviving clusters are then merged agglomeratively
(complete linkage unless told otherwise) down to the requested count and
leftovers join the cluster of their nearest assigned object.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .data import (
    Dataset,
    DistanceMatrix,
    KnnTable,
    ParameterError,
    build_distance_matrix,
    knn_table,
    min_max_normalize,
)
from .game import NONE, EquilibriumError, GameSpec, solve_equilibrium, verify_equilibrium
from .objectives import Cluster, Clustering, dissimilarity_vector, gravity_center

logger = logging.getLogger(__name__)

AUTO = "auto"
LINKAGES = ("single", "complete", "average")

# relative slack when comparing dissimilarities, so float noise does not
# override the index tie-break between objects with equal mean distance
_DM_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class PipelineConfig:
    final_clusters: int
    L: Union[int, str] = AUTO
    normalize: bool = False
    epsilon: float = 1e-12
    linkage: str = "complete"
    refresh_dissimilarity: bool = True

    def __post_init__(self):
        if self.linkage not in LINKAGES:
            raise ParameterError(f"linkage must be one of {LINKAGES}, got {self.linkage!r}")
        if int(self.final_clusters) < 1:
            raise ParameterError(f"final_clusters must be >= 1, got {self.final_clusters}")
        if self.L != AUTO and (isinstance(self.L, bool) or int(self.L) < 1):
            raise ParameterError(f"L must be 'auto' or a positive integer, got {self.L!r}")
        if self.epsilon < 0:
            raise ParameterError("epsilon must be non-negative")


@dataclass(frozen=True)
class MocaContext:
    """Read-only inputs shared by every round."""

    data: Dataset
    dm: DistanceMatrix
    knn: KnnTable
    g: np.ndarray
    epsilon: float = 1e-12

    @property
    def m(self) -> int:
        return self.data.m

    @property
    def L(self) -> int:
        return self.knn.L


@dataclass
class RoundRecord:
    round: int
    phi_before: float
    phi_after: float
    moves: int
    allocations: list = field(default_factory=list)
    dropouts: list = field(default_factory=list)
    idle: list = field(default_factory=list)
    phi_steps: list = field(default_factory=list)


class PipelineState:
    """Mutable clustering under construction plus incremental objective sums.

    Cluster ``k`` is headed by ``heads[k]`` and doubles as player ``k``.
    ``labels[x]`` is the cluster of object ``x`` or ``-1``. Alongside the
    partition the state keeps the sums needed to price any "add object e
    to cluster k" move in O(1):

    * ``hits[k]``: ordered pairs (h, x) inside cluster k with x among h's
      L nearest neighbours;
    * ``hits_in[k, e]`` / ``hits_out[k, e]``: members of k having e as a
      neighbour / neighbours of e that are members of k;
    * ``inter_sum`` and ``intra_sum``: the two inertias times m.
    """

    def __init__(self, heads, ctx: MocaContext):
        heads = [int(h) for h in heads]
        if not heads:
            raise ParameterError("at least one cluster head is required")
        m = ctx.m
        self.round = 0
        self.heads = heads
        self.labels = np.full(m, -1, dtype=int)
        self.labels[heads] = np.arange(len(heads))
        self.active = set(range(len(heads)))
        self.trace: list[RoundRecord] = []
        self.merges: list[tuple] = []
        self.warnings: list[str] = []
        self._ctx = ctx
        self._rebuild_stats()

    def _rebuild_stats(self):
        ctx = self._ctx
        A = ctx.knn.membership.astype(np.int64)
        K = len(self.heads)
        onehot = np.zeros((K, ctx.m), dtype=np.int64)
        assigned = self.labels >= 0
        onehot[self.labels[assigned], np.flatnonzero(assigned)] = 1
        self.sizes = onehot.sum(axis=1)
        self.hits_in = onehot @ A
        self.hits_out = onehot @ A.T
        self.hits = (self.hits_in * onehot).sum(axis=1)
        X = ctx.data.objects
        diff = X[self.heads] - ctx.g
        self.head_g2 = np.einsum("ij,ij->i", diff, diff)
        self.inter_sum = float(self.sizes @ self.head_g2)
        idx = np.flatnonzero(assigned)
        heads_of = np.asarray(self.heads)[self.labels[idx]]
        self.intra_sum = float(np.sum(ctx.dm.dis[idx, heads_of] ** 2))

    @property
    def n_clusters(self) -> int:
        return len(self.heads)

    @property
    def unassigned(self) -> np.ndarray:
        return np.flatnonzero(self.labels < 0)

    @property
    def clustering(self) -> Clustering:
        clusters = tuple(
            Cluster(h, frozenset(np.flatnonzero(self.labels == k).tolist()))
            for k, h in enumerate(self.heads)
        )
        return Clustering(clusters, frozenset(self.unassigned.tolist()))

    def r_square(self) -> float:
        return _ratio(self.inter_sum, self.intra_sum)

    def connectivity(self) -> float:
        return float(self.hits.sum()) / (self._ctx.L * self._ctx.m)

    def phi(self) -> float:
        return self.r_square() * self.connectivity()

    def _r_square_with(self, k: int, objs: np.ndarray) -> np.ndarray:
        d2 = self._ctx.dm.dis[objs, self.heads[k]] ** 2
        return _ratio(self.inter_sum + self.head_g2[k], self.intra_sum + d2)

    def _gained_hits(self, k: int, objs: np.ndarray) -> np.ndarray:
        return self.hits_in[k, objs] + self.hits_out[k, objs]

    def cluster_connectivity_with(self, k: int, objs: np.ndarray) -> np.ndarray:
        """Connectivity of cluster k if each of ``objs`` were added to it alone."""
        gained = self._gained_hits(k, objs)
        return (self.hits[k] + gained) / (self._ctx.L * (self.sizes[k] + 1))

    def phi_with(self, k: int, objs: np.ndarray) -> np.ndarray:
        """Global phi if each of ``objs`` were added to cluster k alone."""
        total = self.hits.sum() + self._gained_hits(k, objs)
        conn = total / (self._ctx.L * self._ctx.m)
        return self._r_square_with(k, objs) * conn

    def add(self, k: int, e: int):
        ctx = self._ctx
        A = ctx.knn.membership
        self.hits[k] += self.hits_in[k, e] + self.hits_out[k, e]
        self.hits_in[k] += A[e]
        self.hits_out[k] += A[:, e]
        self.sizes[k] += 1
        self.inter_sum += self.head_g2[k]
        self.intra_sum += float(ctx.dm.dis[e, self.heads[k]] ** 2)
        self.labels[e] = k


def _ratio(inter, intra):
    denom = inter + intra
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(denom > 0, inter / np.where(denom > 0, denom, 1.0), 0.0)
    return out if np.ndim(out) else float(out)


def choose_L(m: int) -> int:
    """Neighbour count by dataset size: 9 below 150, 14 up to 500, else 28."""
    if m < 150:
        L = 9
    elif m <= 500:
        L = 14
    else:
        L = 28
    return max(1, min(L, m - 1))


def initial_player_count(m: int, L: int) -> int:
    if L < 1:
        raise ParameterError(f"L must be >= 1, got {L}")
    return max(2, m // L)


def identify_players(dm: DistanceMatrix, dmvec: np.ndarray, n0: int, refresh: bool = False) -> list:
    """Pick up to ``n0`` dense, mutually distant cluster heads.

    The object with the lowest dissimilarity is taken first; it and every
    object closer than ``dmax / n0`` leave the candidate pool, and the
    process repeats on what remains. With ``refresh`` the dissimilarity is
    recomputed over the remaining pool before every pick instead of using
    ``dmvec``, which stops the heads from piling up in whichever group
    sits nearest the centre of the whole dataset.
    """
    if n0 < 1:
        raise ParameterError(f"n0 must be >= 1, got {n0}")
    radius = dm.dmax / n0
    dmvec = np.asarray(dmvec, dtype=float)
    pool = np.ones(dm.m, dtype=bool)
    heads = []
    while pool.any() and len(heads) < n0:
        candidates = np.flatnonzero(pool)
        if refresh and candidates.size > 1:
            sub = dm.dis[np.ix_(candidates, candidates)]
            values = sub.sum(axis=1) / (candidates.size - 1)
        else:
            values = dmvec[candidates]
        best = values.min()
        tied = candidates[values <= best + _DM_TIE_RTOL * max(1.0, abs(best))]
        x = int(tied[0])
        heads.append(x)
        pool[x] = False
        pool &= ~(dm.dis[x] < radius)
    return heads


def build_round_game(state: PipelineState, ctx: MocaContext) -> GameSpec:
    """Price every (active head, unassigned object) pair against the committed state.

    The cost of object e for player k is minus the connectivity of cluster
    k with e added, times the global R^2 with e added to k.
    """
    players = sorted(state.active)
    resources = state.unassigned
    if not players:
        raise ValueError("no active players")
    if resources.size == 0:
        raise ValueError("no unassigned objects left to play for")
    cost = np.empty((len(players), resources.size))
    for i, k in enumerate(players):
        cost[i] = -(state.cluster_connectivity_with(k, resources) * state._r_square_with(k, resources))
    return GameSpec(tuple(players), tuple(resources.tolist()), cost)


def accept_if_enhances(state: PipelineState, player: int, resource: int, ctx: MocaContext) -> bool:
    """Commit the allocation if phi strictly improves, else retire the player."""
    if state.labels[resource] >= 0:
        raise ValueError(f"object {resource} is already assigned")
    before = state.phi()
    after = float(state.phi_with(player, np.array([resource]))[0])
    if after > before + ctx.epsilon:
        state.add(player, resource)
        return True
    state.active.discard(player)
    return False


def play_rounds(state: PipelineState, ctx: MocaContext) -> PipelineState:
    while state.unassigned.size and state.active:
        state.round += 1
        game = build_round_game(state, ctx)
        result = solve_equilibrium(game)
        ok, violation = verify_equilibrium(game, result.profile)
        if not ok:
            raise EquilibriumError(f"round {state.round}: profitable deviation {violation}")
        record = RoundRecord(state.round, state.phi(), state.phi(), result.moves)
        for k in game.players:
            e = result.profile.choice[k]
            if e is NONE:
                # resource shortage is not a verdict on the player
                record.idle.append(k)
                continue
            if accept_if_enhances(state, k, e, ctx):
                record.allocations.append((k, e))
                record.phi_steps.append(state.phi())
            else:
                record.dropouts.append(k)
        record.phi_after = state.phi()
        state.trace.append(record)
        logger.debug(
            "round %d: %d allocated, %d dropped, phi %.6f",
            record.round,
            len(record.allocations),
            len(record.dropouts),
            record.phi_after,
        )
    return state


def _linkage_matrix(groups: list, dm: DistanceMatrix, linkage: str) -> np.ndarray:
    reduce = {"single": np.min, "complete": np.max, "average": np.mean}[linkage]
    K = len(groups)
    D = np.full((K, K), np.inf)
    for a in range(K):
        for b in range(a + 1, K):
            D[a, b] = D[b, a] = reduce(dm.dis[np.ix_(groups[a], groups[b])])
    return D


def merge_clusters(
    state: PipelineState, dm: DistanceMatrix, f: int, linkage: str = "complete"
) -> PipelineState:
    """Agglomerate the assigned clusters down to ``f``.

    ``linkage`` picks the inter-cluster distance: ``"complete"`` (largest
    member-pair distance, i.e. the diameter of the merged cluster),
    ``"single"`` (smallest) or ``"average"``. The closest pair merges first,
    ties going to the lexicographically smallest index pair; the merged
    cluster keeps the head of its larger part (the lower index on a tie).
    """
    if f < 1:
        raise ParameterError(f"f must be >= 1, got {f}")
    if linkage not in LINKAGES:
        raise ParameterError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    if state.n_clusters <= f:
        return state
    groups = [np.flatnonzero(state.labels == k) for k in range(state.n_clusters)]
    heads = list(state.heads)
    D = _linkage_matrix(groups, dm, linkage)
    while len(groups) > f:
        K = len(groups)
        # row-major argmin over the strict upper triangle = lexicographic tie-break
        upper = np.where(np.triu(np.ones((K, K), dtype=bool), k=1), D, np.inf)
        a, b = divmod(int(np.argmin(upper)), K)
        na, nb = len(groups[a]), len(groups[b])
        state.merges.append((heads[a], heads[b], float(D[a, b])))
        if linkage == "single":
            row = np.minimum(D[a], D[b])
        elif linkage == "complete":
            row = np.maximum(D[a], D[b])
        else:
            row = (na * D[a] + nb * D[b]) / (na + nb)
        heads[a] = heads[b] if nb > na else heads[a]
        groups[a] = np.union1d(groups[a], groups[b])
        D[a] = row
        D[:, a] = row
        D[a, a] = np.inf
        del groups[b], heads[b]
        D = np.delete(np.delete(D, b, axis=0), b, axis=1)
    labels = np.full(dm.m, -1, dtype=int)
    for k, g in enumerate(groups):
        labels[g] = k
    state.labels = labels
    state.heads = heads
    state.active = set()
    state._rebuild_stats()
    return state


def assign_leftovers(state: PipelineState, dm: DistanceMatrix) -> PipelineState:
    """Attach each unassigned object, by ascending id, to its nearest member's cluster."""
    if state.n_clusters == 0:
        raise ValueError("no clusters to assign leftovers to")
    leftovers = state.unassigned
    if leftovers.size == 0:
        return state
    groups = [list(np.flatnonzero(state.labels == k)) for k in range(state.n_clusters)]
    for x in leftovers:
        dists = [dm.dis[x, g].min() for g in groups]
        k = int(np.argmin(dists))
        groups[k].append(int(x))
        state.labels[x] = k
    state._rebuild_stats()
    return state


@dataclass
class MocaResult:
    clustering: Clustering
    state: PipelineState
    context: MocaContext
    L: int
    n0: int
    heads: list
    initial_clusters: int
    warnings: list

    @property
    def labels(self) -> np.ndarray:
        return self.state.labels.copy()


def prepare_context(data: Dataset, L, normalize: bool = False, epsilon: float = 1e-12) -> MocaContext:
    if normalize:
        data = min_max_normalize(data)
    dm = build_distance_matrix(data)
    if L == AUTO:
        L = choose_L(data.m)
    knn = knn_table(dm, int(L))
    return MocaContext(data, dm, knn, gravity_center(data), epsilon)


def run_moca(data: Dataset, config: PipelineConfig) -> MocaResult:
    f = int(config.final_clusters)
    if f > data.m:
        raise ParameterError(f"final_clusters={f} exceeds the {data.m} objects")
    ctx = prepare_context(data, config.L, config.normalize, config.epsilon)
    n0 = initial_player_count(ctx.m, ctx.L)
    heads = identify_players(
        ctx.dm, dissimilarity_vector(ctx.dm), n0, refresh=config.refresh_dissimilarity
    )
    state = PipelineState(heads, ctx)
    play_rounds(state, ctx)
    initial = state.n_clusters
    if f > initial:
        msg = f"only {initial} initial clusters formed; returning {initial} instead of {f}"
        state.warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    merge_clusters(state, ctx.dm, f, config.linkage)
    assign_leftovers(state, ctx.dm)
    return MocaResult(state.clustering, state, ctx, ctx.L, n0, heads, initial, state.warnings)
