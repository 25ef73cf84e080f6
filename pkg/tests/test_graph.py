"""Graph container, BFS neighbourhoods, 2-independent sets, edge IO."""

from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cycle_graph, path_graph, random_graph
from rgres.graph import (Graph, edge_count_between, edge_count_within,
                         greedy_2_independent_set, neighborhood_within,
                         read_edge_list, write_edge_list)


def bfs_within(g, v, ell):
    """Reference implementation: plain BFS to depth ell, centre excluded."""
    seen = {v}
    frontier = deque([(v, 0)])
    while frontier:
        u, d = frontier.popleft()
        if d == ell:
            continue
        for w in g.neighbors(u):
            if w not in seen:
                seen.add(w)
                frontier.append((w, d + 1))
    return frozenset(seen) - {v}


small_graphs = st.integers(2, 12).flatmap(
    lambda n: st.builds(
        lambda es: Graph.from_edges(n, sorted(es)),
        st.sets(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
            .filter(lambda e: e[0] < e[1]),
            max_size=n * (n - 1) // 2,
        ),
    )
)


class TestConstruction:
    def test_rejects_loops(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(1, 1)])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(0, 1), (1, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(0, 3)])

    def test_complete(self):
        g = Graph.complete(5)
        assert g.m == 10
        assert g.min_degree() == g.max_degree() == 4

    def test_mask_drops_adjacency(self):
        g = cycle_graph(5).with_mask({0, 1, 2})
        assert g.n_active == 3
        assert g.degree(0) == 1  # edge to 4 is gone
        assert sorted(g.edges()) == [(0, 1), (1, 2)]

    def test_mask_must_nest(self):
        g = cycle_graph(5).with_mask({0, 1, 2})
        with pytest.raises(ValueError):
            g.with_mask({0, 4})

    def test_subtract_and_union_roundtrip(self, rng):
        g = random_graph(rng, 10, 0.4)
        h = random_graph(rng, 10, 0.2)
        assert g.subtract(h).union(h).edge_set() >= g.edge_set()
        assert g.subtract(h).edge_set() == g.edge_set() - h.edge_set()

    def test_add_edges_respects_mask(self):
        g = cycle_graph(5).with_mask({0, 1, 2})
        with pytest.raises(ValueError):
            g.add_edges([(0, 4)])

    def test_csr_matches_adjacency(self, rng):
        g = random_graph(rng, 15, 0.3)
        indptr, indices = g.csr()
        for v in range(g.n):
            assert sorted(g.neighbors(v)) == list(indices[indptr[v]:indptr[v + 1]])


class TestNeighborhoods:
    @settings(max_examples=60, deadline=None)
    @given(g=small_graphs, ell=st.integers(1, 4))
    def test_matches_plain_bfs(self, g, ell):
        for v in g.active:
            assert neighborhood_within(g, v, ell) == bfs_within(g, v, ell)

    def test_depth_zero_rejected(self):
        g = path_graph(4)
        with pytest.raises(ValueError):
            neighborhood_within(g, 1, 0)

    def test_path_depths(self):
        g = path_graph(6)
        assert neighborhood_within(g, 0, 2) == {1, 2}
        assert neighborhood_within(g, 0, 5) == set(range(1, 6))


class TestEdgeCounts:
    def test_within_triangle(self):
        g = Graph.complete(3)
        assert edge_count_within(g, {0, 1, 2}) == 3

    def test_between_double_counts_overlap(self):
        # e(X, Y) counts an edge once per (x, y) incidence: an edge inside
        # the overlap contributes twice
        g = Graph.from_edges(2, [(0, 1)])
        assert edge_count_between(g, {0, 1}, {0, 1}) == 2

    def test_disjoint_parts(self, rng):
        g = random_graph(rng, 12, 0.5)
        x, y = set(range(6)), set(range(6, 12))
        expect = sum(1 for u, v in g.edges() if (u in x) != (v in x))
        assert edge_count_between(g, x, y) == expect


class Test2IndependentSets:
    def test_result_is_2_independent(self, rng):
        for _ in range(50):
            g = random_graph(rng, 20, 0.15)
            s = greedy_2_independent_set(g, g.active, 20)
            for u in s:
                blocked = g.neighbors(u) | {w for x in g.neighbors(u)
                                            for w in g.neighbors(x)}
                assert not (s - {u}) & blocked

    def test_target_respected(self):
        g = Graph.empty(10)
        assert len(greedy_2_independent_set(g, g.active, 4)) == 4

    def test_empty_when_target_zero(self):
        g = cycle_graph(6)
        assert greedy_2_independent_set(g, g.active, 0) == frozenset()


class TestEdgeListIO:
    def test_roundtrip(self, tmp_path, rng):
        g = random_graph(rng, 14, 0.3)
        path = tmp_path / "g.txt"
        write_edge_list(g, str(path))
        assert read_edge_list(str(path)) == g

    def test_rejects_duplicate_lines(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 2\n0 1\n1 0\n")
        with pytest.raises(ValueError):
            read_edge_list(str(path))

    def test_tolerates_unsorted(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("4 2\n2 3\n1 0\n")
        g = read_edge_list(str(path))
        assert sorted(g.edges()) == [(0, 1), (2, 3)]
