"""Graph primitives and brute-force oracles."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treecut import (ArgumentError, Graph, OversizeError, Partition, VertexWeights,
                     boundary_capacity, boundary_degree_map, brute_force_sparsest_cut,
                     check_expanding, check_laminar, fuse, partition_boundary_degree)

from conftest import connected_graphs, philox, weighted_graphs


class TestGraphConstruction:
    def test_parallel_edges_aggregate(self):
        g = Graph.from_edges(2, [(0, 1, 2), (1, 0, 3)])
        assert g.edges == ((0, 1, 5),)

    def test_self_loop_rejected(self):
        with pytest.raises(ArgumentError):
            Graph.from_edges(2, [(0, 0, 1), (0, 1, 1)])

    def test_zero_capacity_rejected(self):
        with pytest.raises(ArgumentError):
            Graph.from_edges(2, [(0, 1, 0)])

    def test_disconnected_rejected(self):
        with pytest.raises(ArgumentError):
            Graph.from_edges(4, [(0, 1, 1), (2, 3, 1)])

    def test_disconnected_allowed_when_asked(self):
        g = Graph.from_edges(4, [(0, 1, 1), (2, 3, 1)], require_connected=False)
        assert len(g.components()) == 2


class TestBoundaryCapacity:
    def test_full_ground_has_no_boundary(self, path3):
        assert boundary_capacity(path3, {0, 1, 2}, {0, 1, 2}) == 0

    def test_empty_set(self, path3):
        assert boundary_capacity(path3, set(), {0, 1, 2}) == 0

    def test_path_interior(self, path3):
        assert boundary_capacity(path3, {1}, {0, 1, 2}) == 2

    def test_subset_outside_ground_rejected(self, path3):
        with pytest.raises(ArgumentError):
            boundary_capacity(path3, {0}, {1, 2})

    @settings(max_examples=60, deadline=None)
    @given(connected_graphs(), st.data())
    def test_complement_symmetry(self, graph, data):
        ground = set(range(graph.n))
        subset = {v for v in ground if data.draw(st.booleans())}
        assert boundary_capacity(graph, subset, ground) == \
            boundary_capacity(graph, ground - subset, ground)


class TestPartitionBoundaryDegree:
    def test_trivial_partition_is_zero(self, path3):
        part = Partition.trivial(range(3))
        assert partition_boundary_degree(path3, part, {0, 1, 2}) == 0

    def test_singletons_on_path(self, path3):
        part = Partition.singletons(range(3))
        assert partition_boundary_degree(path3, part, {1}) == 2

    def test_double_k4_total_is_twice_edges(self, double_k4):
        part = Partition.singletons(range(8))
        assert partition_boundary_degree(double_k4, part, range(8)) == 26

    @settings(max_examples=40, deadline=None)
    @given(connected_graphs(max_n=8))
    def test_additive_over_clusters(self, graph):
        part = Partition.singletons(range(graph.n))
        total = partition_boundary_degree(graph, part, range(graph.n))
        assert total == sum(partition_boundary_degree(graph, part, c)
                            for c in part.clusters)

    def test_counts_edges_leaving_ground(self, path3):
        part = Partition.singletons({1})
        assert partition_boundary_degree(path3, part, {1}) == 2


class TestFuse:
    def test_fuse_existing_cluster_is_identity(self, path3):
        part = Partition.of([{0, 1}, {2}])
        assert fuse(part, {0, 1}, path3) == part

    def test_fuse_whole_edge(self):
        g = Graph.from_edges(2, [(0, 1, 1)])
        part = fuse(Partition.singletons(range(2)), {0, 1}, g)
        assert part.clusters == (frozenset({0, 1}),)
        assert boundary_degree_map(g, part).total() == 0

    def test_triangle_fuse(self):
        g = Graph.from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
        part = fuse(Partition.singletons(range(3)), {0, 1}, g)
        assert set(part.clusters) == {frozenset({0, 1}), frozenset({2})}
        assert boundary_degree_map(g, part).total() == 4

    def test_empty_fuse_rejected(self, path3):
        with pytest.raises(ArgumentError):
            fuse(Partition.singletons(range(3)), set())

    @settings(max_examples=60, deadline=None)
    @given(connected_graphs(max_n=9), st.data())
    def test_fuse_boundary_growth_bound(self, graph, data):
        verts = sorted(data.draw(
            st.sets(st.integers(0, graph.n - 1), min_size=2, max_size=graph.n)))
        part = Partition.singletons(verts)
        merged = data.draw(st.sets(st.sampled_from(verts), min_size=1))
        before = boundary_degree_map(graph, part)
        after_part = fuse(part, merged, graph)  # the bound is asserted inside
        after = boundary_degree_map(graph, after_part)
        rest = set(verts) - merged
        outside = set(range(graph.n)) - set(verts)
        bound = (before.total() - before.total(merged)
                 + 2 * sum(graph.capacity(u, v) for u in merged for v in rest)
                 + sum(graph.capacity(u, v) for u in merged for v in outside))
        assert after.total() <= bound


class TestSparsestCutOracle:
    def test_double_k4_bridge(self, double_k4):
        cut, sparsity = brute_force_sparsest_cut(
            double_k4, VertexWeights.degrees(double_k4))
        assert sparsity == Fraction(1, 13)
        assert cut.vertices in (frozenset(range(4)), frozenset(range(4, 8)))

    def test_single_edge(self):
        g = Graph.from_edges(2, [(0, 1, 1)])
        _cut, sparsity = brute_force_sparsest_cut(g, VertexWeights({0: 1, 1: 1}))
        assert sparsity == 1

    def test_k4_at_most_one(self):
        g = Graph.from_edges(4, [(i, j, 1) for i in range(4) for j in range(i + 1, 4)])
        _cut, sparsity = brute_force_sparsest_cut(g, VertexWeights.degrees(g))
        assert sparsity <= 1

    def test_zero_weights_rejected(self, path3):
        with pytest.raises(ArgumentError):
            brute_force_sparsest_cut(path3, VertexWeights({}))

    def test_oversize_refused(self):
        g = Graph.from_edges(25, [(i, i + 1, 1) for i in range(24)])
        with pytest.raises(OversizeError):
            brute_force_sparsest_cut(g, VertexWeights.degrees(g))

    def test_single_support_rejected(self, path3):
        with pytest.raises(ArgumentError):
            brute_force_sparsest_cut(path3, VertexWeights({1: 7}))

    @settings(max_examples=25, deadline=None)
    @given(weighted_graphs(max_n=8), st.integers(0, 2 ** 32 - 1))
    def test_beats_random_cuts(self, graph_weights, seed):
        graph, weights = graph_weights
        if len(weights.support()) <= 1:
            weights = VertexWeights.degrees(graph)
        _cut, best = brute_force_sparsest_cut(graph, weights)
        rng = philox(seed)
        total = weights.total()
        ground = range(graph.n)
        for _ in range(1000):
            mask = int(rng.integers(1, 2 ** graph.n - 1))
            subset = {v for v in ground if (mask >> v) & 1}
            w = weights.total(subset)
            if w == 0 or 2 * w > total:
                continue
            ratio = Fraction(boundary_capacity(graph, subset, ground), w)
            assert best <= ratio


class TestCheckExpanding:
    def test_single_vertex(self, path3):
        ok, witness = check_expanding(path3, {0}, VertexWeights({0: 5}), 100)
        assert ok and witness is None

    def test_disconnected_piece_fails(self):
        g = Graph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
        ok, witness = check_expanding(g, {0, 3}, VertexWeights({0: 1, 3: 1}),
                                      Fraction(1, 1000))
        assert not ok
        assert witness.capacity == 0

    def test_double_k4_threshold(self, double_k4):
        deg = VertexWeights.degrees(double_k4)
        assert check_expanding(double_k4, range(8), deg, Fraction(1, 13))[0]
        ok, witness = check_expanding(double_k4, range(8), deg, Fraction(1, 12))
        assert not ok
        assert witness.vertices in (frozenset(range(4)), frozenset(range(4, 8)))

    @settings(max_examples=25, deadline=None)
    @given(weighted_graphs(max_n=7), st.fractions(min_value=0, max_value=2))
    def test_monotone_in_quality(self, graph_weights, quality):
        graph, weights = graph_weights
        ok_high, _ = check_expanding(graph, range(graph.n), weights, quality)
        if ok_high:
            assert check_expanding(graph, range(graph.n), weights, quality / 2)[0]


class TestCheckLaminar:
    def test_single_level(self):
        assert check_laminar([Partition.trivial(range(4))])

    def test_two_levels(self):
        levels = [Partition.trivial(range(2)), Partition.singletons(range(2))]
        assert check_laminar(levels)

    def test_straddling_cluster_fails(self):
        levels = [Partition.trivial(range(4)),
                  Partition.of([{0, 1}, {2, 3}]),
                  Partition.of([{0}, {1, 2}, {3}])]
        assert not check_laminar(levels)

    def test_missing_root_fails(self):
        assert not check_laminar([Partition.of([{0}, {1}])])
