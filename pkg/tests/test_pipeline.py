import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mocasm.data import Dataset, ParameterError
from mocasm.game import solve_equilibrium, verify_equilibrium
from mocasm.objectives import (
    Clustering,
    cluster_connectivity,
    dissimilarity_vector,
    phi,
    r_square,
)
from mocasm.pipeline import (
    PipelineConfig,
    PipelineState,
    accept_if_enhances,
    assign_leftovers,
    build_round_game,
    choose_L,
    identify_players,
    initial_player_count,
    merge_clusters,
    play_rounds,
    prepare_context,
    run_moca,
)


def state_for(points, heads, L):
    ctx = prepare_context(Dataset(np.asarray(points, dtype=float)), L)
    return PipelineState(heads, ctx), ctx


def check_state_against_objectives(state, ctx):
    """The incremental sums must agree with a from-scratch evaluation."""
    c = state.clustering
    assert state.phi() == pytest.approx(phi(c, ctx.data, ctx.dm, ctx.knn), abs=1e-12)
    assert state.r_square() == pytest.approx(r_square(c, ctx.data, ctx.dm), abs=1e-12)


def slow_cost_table(state, ctx, game):
    c = state.clustering
    table = np.empty((len(game.players), len(game.resources)))
    for i, k in enumerate(game.players):
        for j, e in enumerate(game.resources):
            tentative = c.with_member(k, e)
            conn = cluster_connectivity(tentative.clusters[k], ctx.knn)
            table[i, j] = -(conn * r_square(tentative, ctx.data, ctx.dm))
    return table


class TestSchedule:
    @pytest.mark.parametrize(
        "m, L", [(76, 9), (149, 9), (150, 14), (178, 14), (400, 14), (500, 14), (501, 28), (1500, 28)]
    )
    def test_choose_L(self, m, L):
        assert choose_L(m) == L

    def test_choose_L_clamped(self):
        assert choose_L(6) == 5
        assert choose_L(2) == 1

    @pytest.mark.parametrize("m, L, n0", [(150, 14, 10), (1500, 28, 53), (6, 9, 2), (400, 14, 28)])
    def test_initial_player_count(self, m, L, n0):
        assert initial_player_count(m, L) == n0

    def test_initial_player_count_rejects_bad_L(self):
        with pytest.raises(ParameterError):
            initial_player_count(10, 0)


class TestIdentifyPlayers:
    def test_toy(self, toy):
        ctx = prepare_context(toy, 2)
        dmvec = dissimilarity_vector(ctx.dm)
        np.testing.assert_allclose(dmvec, [3.12, 3.04, 3.0, 3.0, 3.04, 3.12], rtol=1e-12)
        assert identify_players(ctx.dm, dmvec, 2) == [2, 3]

    def test_toy_refreshed(self, toy):
        # over the pool {5.0, 5.1, 5.2} the middle object is densest
        ctx = prepare_context(toy, 2)
        assert identify_players(ctx.dm, dissimilarity_vector(ctx.dm), 2, refresh=True) == [2, 4]

    def test_huge_radius_gives_one_head(self, toy):
        ctx = prepare_context(toy, 2)
        assert len(identify_players(ctx.dm, dissimilarity_vector(ctx.dm), 1)) == 1

    def test_no_elimination_takes_everything_by_density(self):
        # dmax 10, n0 4 -> radius 2.5 below the smallest gap of 3
        ctx = prepare_context(Dataset([0.0, 4.0, 7.0, 10.0]), 1)
        dmvec = dissimilarity_vector(ctx.dm)
        np.testing.assert_allclose(dmvec, [7, 13 / 3, 13 / 3, 19 / 3])
        assert identify_players(ctx.dm, dmvec, 4) == [1, 2, 3, 0]

    def test_rejects_n0_below_one(self, toy):
        ctx = prepare_context(toy, 2)
        with pytest.raises(ParameterError):
            identify_players(ctx.dm, dissimilarity_vector(ctx.dm), 0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(3, 40), st.integers(1, 12), st.booleans(), st.integers(0, 2**32 - 1))
    def test_heads_are_spaced(self, m, n0, refresh, seed):
        X = np.random.default_rng(seed).normal(size=(m, 2))
        ctx = prepare_context(Dataset(X), 1)
        heads = identify_players(ctx.dm, dissimilarity_vector(ctx.dm), n0, refresh=refresh)
        assert 1 <= len(heads) <= n0 and len(set(heads)) == len(heads)
        for a, b in itertools.combinations(heads, 2):
            assert ctx.dm.dis[a, b] >= ctx.dm.dmax / n0


class TestRoundGame:
    def test_smallest_game(self):
        state, ctx = state_for([0.0, 1.0], [0], 1)
        game = build_round_game(state, ctx)
        assert game.cost.shape == (1, 1)

    def test_toy_costs(self, toy):
        state, ctx = state_for(toy.objects, [2, 3], 2)
        game = build_round_game(state, ctx)
        assert game.cost.shape == (2, 4) and game.resources == (0, 1, 4, 5)
        # head 0.2 taking 0.1: connectivity 2/(2*2), R^2 = 17.28 / (17.28 + 0.01)
        assert game.stored_cost(0, 1) == pytest.approx(-0.5 * 17.28 / 17.29, rel=1e-12)
        # 5.1 shares no neighbour relation with 0.2
        assert game.stored_cost(0, 4) == 0.0
        assert game.stored_cost(0, 1) < game.stored_cost(0, 4)

    def test_matches_slow_evaluation(self, toy):
        state, ctx = state_for(toy.objects, [2, 3], 2)
        state.add(0, 1)
        game = build_round_game(state, ctx)
        np.testing.assert_allclose(game.cost, slow_cost_table(state, ctx, game), atol=1e-12)

    def test_construction_is_pure(self, toy):
        state, ctx = state_for(toy.objects, [2, 3], 2)
        a = build_round_game(state, ctx)
        b = build_round_game(state, ctx)
        np.testing.assert_array_equal(a.cost, b.cost)
        assert state.unassigned.tolist() == [0, 1, 4, 5]

    def test_requires_unassigned_objects(self):
        state, ctx = state_for([0.0, 1.0], [0, 1], 1)
        with pytest.raises(ValueError):
            build_round_game(state, ctx)


class TestAccept:
    def test_first_neighbour_is_accepted(self, toy):
        state, ctx = state_for(toy.objects, [2, 3], 2)
        assert accept_if_enhances(state, 0, 1, ctx)
        assert state.labels[1] == 0 and state.phi() > 0

    def test_far_object_rejected_and_player_retires(self, toy):
        state, ctx = state_for(toy.objects, [2, 3], 2)
        state.add(0, 1)
        before = state.phi()
        assert not accept_if_enhances(state, 0, 5, ctx)
        assert 0 not in state.active and state.labels[5] == -1 and state.phi() == before

    def test_zero_gain_rejected(self, toy):
        # singleton heads: phi is 0 before and stays 0 for an unrelated object
        state, ctx = state_for(toy.objects, [2, 3], 2)
        assert state.phi() == 0
        assert not accept_if_enhances(state, 0, 5, ctx)

    def test_assigned_resource_is_a_contract_violation(self, toy):
        state, ctx = state_for(toy.objects, [2, 3], 2)
        with pytest.raises(ValueError):
            accept_if_enhances(state, 0, 3, ctx)


class TestPlayRounds:
    def test_toy(self, toy):
        state, ctx = state_for(toy.objects, [2, 3], 2)
        play_rounds(state, ctx)
        labels = state.labels
        assert set(np.flatnonzero(labels == 0)) <= {0, 1, 2}
        assert set(np.flatnonzero(labels == 1)) <= {3, 4, 5}
        assert state.round == len(state.trace) <= 6

    def test_universal_rejection(self):
        # heads 0 and 1 are each other's only neighbour; 50 and 52 pair up
        state, ctx = state_for([0.0, 1.0, 50.0, 52.0], [0, 1], 1)
        play_rounds(state, ctx)
        assert len(state.trace) == 1
        assert sorted(state.trace[0].dropouts) == [0, 1]
        assert state.labels.tolist() == [0, 1, -1, -1]

    def test_every_object_a_head(self):
        state, ctx = state_for([0.0, 4.0, 7.0], [0, 1, 2], 1)
        play_rounds(state, ctx)
        assert state.trace == []

    def test_incremental_state_matches_objectives_every_round(self, rng):
        X = np.vstack([rng.normal(0, 0.3, size=(15, 2)), rng.normal(4, 0.3, size=(15, 2))])
        ctx = prepare_context(Dataset(X), 5)
        heads = identify_players(ctx.dm, dissimilarity_vector(ctx.dm), 4)
        state = PipelineState(heads, ctx)
        while state.unassigned.size and state.active:
            game = build_round_game(state, ctx)
            np.testing.assert_allclose(game.cost, slow_cost_table(state, ctx, game), atol=1e-12)
            profile = solve_equilibrium(game).profile
            assert verify_equilibrium(game, profile)[0]
            for k in game.players:
                e = profile.choice[k]
                if e is not None:
                    accept_if_enhances(state, k, e, ctx)
                    check_state_against_objectives(state, ctx)


def clustered_state(points, labels, heads, L=1):
    state, ctx = state_for(points, heads, L)
    for x, k in enumerate(labels):
        if k >= 0 and x not in heads:
            state.add(k, x)
    return state, ctx


class TestMerge:
    def test_closest_pair_merges(self):
        # single-linkage distances A-B 0.5, A-C 3.2, B-C 3.0 (a realisable triangle)
        a, b = (0.0, 0.0), (0.5, 0.0)
        x = (0.5**2 + 3.2**2 - 3.0**2) / (2 * 0.5)
        c = (x, (3.2**2 - x**2) ** 0.5)
        state, ctx = state_for([a, b, c], [0, 1, 2], 1)
        merge_clusters(state, ctx.dm, 2, linkage="single")
        assert state.labels.tolist() == [0, 0, 1]
        assert state.merges[0][2] == pytest.approx(0.5)

    def test_noop_when_already_small(self, toy):
        state, ctx = clustered_state(toy.objects, [0, 0, 0, 1, 1, 1], [2, 3])
        before = state.labels.copy()
        merge_clusters(state, ctx.dm, 2)
        merge_clusters(state, ctx.dm, 5)
        np.testing.assert_array_equal(state.labels, before)
        assert state.merges == []

    @pytest.mark.parametrize("linkage", ["single", "complete", "average"])
    def test_chain_to_one(self, linkage):
        pts = [0.0, 1.0, 1.1, 3.0, 6.0]
        state, ctx = clustered_state(pts, [0, 1, 1, 2, 3], [0, 1, 3, 4])
        merge_clusters(state, ctx.dm, 1, linkage=linkage)
        assert state.labels.tolist() == [0] * 5
        assert len(state.merges) == 3
        # the final merge joins the 4-member block with the singleton at 6.0
        assert state.heads == [1]

    def test_head_of_larger_part_survives(self):
        state, ctx = clustered_state([0.0, 1.0, 1.2, 10.0], [0, 1, 1, 2], [0, 2, 3])
        merge_clusters(state, ctx.dm, 2, linkage="single")
        assert state.heads == [2, 3]

    def test_equal_sizes_keep_lower_index_head(self):
        state, ctx = clustered_state([0.0, 1.0, 10.0], [0, 1, 2], [0, 1, 2])
        merge_clusters(state, ctx.dm, 2)
        assert state.heads == [0, 2]

    def test_single_and_complete_differ_on_a_chain(self):
        # A=[0,1], B=[2.5], C=[4,5]: single ties A-B / B-C at 1.5 -> A,B;
        # complete: A-B 2.5, B-C 2.5, A-C 5 -> A,B as well; shift C to break it
        pts = [0.0, 1.0, 2.5, 3.9, 4.2]
        labels = [0, 0, 1, 2, 2]
        s1, ctx = clustered_state(pts, labels, [0, 2, 3])
        s2, _ = clustered_state(pts, labels, [0, 2, 3])
        merge_clusters(s1, ctx.dm, 2, linkage="single")
        merge_clusters(s2, ctx.dm, 2, linkage="complete")
        assert s1.labels.tolist() == [0, 0, 1, 1, 1]  # B-C single 1.4 < A-B 1.5
        assert s2.labels.tolist() == [0, 0, 1, 1, 1]  # B-C complete 1.7 < A-B 2.5

    def test_rejects_bad_arguments(self, toy):
        state, ctx = clustered_state(toy.objects, [0, 0, 0, 1, 1, 1], [2, 3])
        with pytest.raises(ParameterError):
            merge_clusters(state, ctx.dm, 0)
        with pytest.raises(ParameterError):
            merge_clusters(state, ctx.dm, 1, linkage="ward")


class TestLeftovers:
    def test_nothing_to_do(self, toy):
        state, ctx = clustered_state(toy.objects, [0, 0, 0, 1, 1, 1], [2, 3])
        before = state.labels.copy()
        assign_leftovers(state, ctx.dm)
        np.testing.assert_array_equal(state.labels, before)

    def test_tie_goes_to_lower_cluster(self):
        state, ctx = state_for([-1.0, 1.0, 0.0], [1, 0], 1)
        assign_leftovers(state, ctx.dm)
        assert state.labels.tolist() == [1, 0, 0]

    def test_nearest_member(self):
        state, ctx = clustered_state([0.0, 0.1, 2.1, 0.2], [0, 1, 1, -1], [0, 2])
        # object 3 is 0.1 from member 1 of cluster 1 but 0.2 from cluster 0
        assign_leftovers(state, ctx.dm)
        assert state.labels[3] == 1

    def test_sequential_assignments_are_visible(self):
        # 3 joins cluster 1 via member 2; 4 then reaches cluster 1 through 3
        state, ctx = clustered_state([0.0, 10.0, 2.0, 4.0, 5.5], [0, 1, 0, -1, -1], [0, 1])
        assign_leftovers(state, ctx.dm)
        assert state.labels.tolist() == [0, 1, 0, 0, 0]


class TestRunMoca:
    def test_toy_partition(self, toy):
        res = run_moca(toy, PipelineConfig(2, L=3))
        assert res.labels.tolist() == [0, 0, 0, 1, 1, 1]

    @pytest.mark.parametrize("refresh", [True, False])
    def test_toy_partition_both_head_rules(self, toy, refresh):
        res = run_moca(toy, PipelineConfig(2, L=3, refresh_dissimilarity=refresh))
        assert {frozenset(c.members) for c in res.clustering.clusters} == {
            frozenset({0, 1, 2}),
            frozenset({3, 4, 5}),
        }

    def test_one_cluster(self, toy):
        res = run_moca(toy, PipelineConfig(1, L=2))
        assert res.labels.tolist() == [0] * 6

    def test_deterministic(self, rng):
        data = Dataset(rng.normal(size=(60, 3)))
        a = run_moca(data, PipelineConfig(3))
        b = run_moca(data, PipelineConfig(3))
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_too_few_initial_clusters_warns(self, toy):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = run_moca(toy, PipelineConfig(4, L=3))
        assert res.initial_clusters == 2 and len(np.unique(res.labels)) == 2
        assert res.warnings and any("initial clusters" in str(w.message) for w in caught)

    def test_f_larger_than_m(self, toy):
        with pytest.raises(ParameterError):
            run_moca(toy, PipelineConfig(7))

    def test_explicit_L_out_of_range(self, toy):
        with pytest.raises(ParameterError):
            run_moca(toy, PipelineConfig(2, L=6))

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            PipelineConfig(0)
        with pytest.raises(ParameterError):
            PipelineConfig(2, L=0)
        with pytest.raises(ParameterError):
            PipelineConfig(2, linkage="ward")


def assert_pipeline_invariants(res, f):
    state, ctx = res.state, res.context
    labels = res.labels
    assert labels.min() >= 0 and labels.size == ctx.m
    assert len(np.unique(labels)) == min(f, res.initial_clusters)
    clusters = res.clustering.clusters
    assert sum(len(c) for c in clusters) == ctx.m and not res.clustering.unassigned
    steps = [s for r in state.trace for s in [r.phi_before, *r.phi_steps]]
    assert all(b >= a for a, b in zip(steps, steps[1:]))
    radius = ctx.dm.dmax / res.n0
    for a, b in itertools.combinations(res.heads, 2):
        assert ctx.dm.dis[a, b] >= radius
    assert len(state.merges) == max(0, res.initial_clusters - f)
    assert len(state.trace) <= ctx.m


@settings(max_examples=40, deadline=None)
@given(st.integers(6, 60), st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_invariants_on_random_data(m, d, f, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(m, d)) * rng.uniform(0.1, 5.0)
    f = min(f, m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_moca(Dataset(X), PipelineConfig(f))
    assert_pipeline_invariants(res, f)


def test_invariants_on_toy(toy):
    assert_pipeline_invariants(run_moca(toy, PipelineConfig(2, L=3)), 2)
