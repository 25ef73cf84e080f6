"""Process sampling, hitting times, seed derivation, sandwich coupling."""

import itertools
import math

import numpy as np
import pytest

from rgres import process as P
from rgres.graph import Graph


class TestPairIndexing:
    def test_bijection_small(self):
        n = 7
        seen = set()
        for u in range(n):
            for v in range(u + 1, n):
                seen.add(P.pair_index(u, v, n))
        assert seen == set(range(P.num_pairs(n)))

    def test_unrank_inverts_rank(self):
        n = 9
        idx = np.arange(P.num_pairs(n))
        us, vs = P.pairs_from_indices(idx, n)
        back = [P.pair_index(int(u), int(v), n) for u, v in zip(us, vs)]
        assert back == list(range(P.num_pairs(n)))


class TestSeedDerivation:
    def test_distinct_indices_distinct_seeds(self):
        seeds = {P.derive_seed(42, i) for i in range(1000)}
        assert len(seeds) == 1000

    def test_stable(self):
        # pinned: replay files depend on this mixing staying fixed
        assert P.derive_seed(0, 0) == P.derive_seed(0, 0)
        assert P.derive_seed(0, 1) != P.derive_seed(1, 0)

    def test_splitmix_known_zero_input(self):
        assert P.splitmix64(0) != 0


class TestProcess:
    def test_prefix_property(self):
        tr = P.sample_process(20, 100, seed=5)
        g50 = P.graph_at(tr, 50)
        g80 = P.graph_at(tr, 80)
        assert g50.edge_set() <= g80.edge_set()

    def test_edges_distinct(self):
        tr = P.sample_process(15, 105, seed=9)
        assert len(set(tr.edges)) == len(tr.edges) == 105

    def test_milestones_recomputed(self):
        tr = P.sample_process(30, 200, seed=3)
        for k in (1, 2, 3):
            m_k = tr.milestones.get(k)
            if m_k is None:
                continue
            assert P.graph_at(tr, m_k).min_degree() >= k
            if m_k > 0:
                assert P.graph_at(tr, m_k - 1).min_degree() < k

    def test_monotone_milestones(self):
        tr = P.sample_process_until(50, 3, seed=11)
        assert tr.milestones[1] <= tr.milestones[2] <= tr.milestones[3]

    def test_triangle_deterministic(self):
        # on 3 vertices the process is forced: delta >= 1 after 2 edges,
        # delta >= 2 exactly at the third
        for seed in range(5):
            tr = P.sample_process(3, 3, seed=seed)
            assert tr.milestones[1] == 2
            assert tr.milestones[2] == 3

    def test_until_extends_far_enough(self):
        tr = P.sample_process_until(40, 2, seed=7)
        assert 2 in tr.milestones
        assert P.graph_at(tr, tr.milestones[2]).min_degree() >= 2

    def test_same_seed_same_trace(self):
        a = P.sample_process(25, 150, seed=123)
        b = P.sample_process(25, 150, seed=123)
        assert a.edges == b.edges

    def test_trace_io_roundtrip(self, tmp_path):
        tr = P.sample_process_until(20, 2, seed=2)
        path = tmp_path / "trace.txt"
        P.write_trace(tr, str(path))
        back = P.read_trace(str(path))
        assert back.edges == tr.edges
        # the dump format carries m1/m2 only
        assert back.milestone(1) == tr.milestone(1)
        assert back.milestone(2) == tr.milestone(2)
        assert back.n == tr.n and back.seed == tr.seed


class TestGnp:
    def test_edge_count_concentrates(self):
        n, p = 60, 0.3
        total = P.num_pairs(n)
        counts = [P.sample_gnp(n, p, seed=s).m for s in range(40)]
        mean = sum(counts) / len(counts)
        sd = math.sqrt(total * p * (1 - p))
        assert abs(mean - total * p) < 4 * sd / math.sqrt(len(counts)) + 1

    def test_extremes(self):
        assert P.sample_gnp(10, 0.0, seed=1).m == 0
        assert P.sample_gnp(10, 1.0, seed=1).m == 45

    def test_pair_marginal_uniform(self):
        # each pair should appear with frequency ~ p
        n, p, reps = 8, 0.25, 3000
        hits = np.zeros(P.num_pairs(n))
        for s in range(reps):
            for u, v in P.sample_gnp(n, p, seed=s).edges():
                hits[P.pair_index(u, v, n)] += 1
        freq = hits / reps
        assert np.all(np.abs(freq - p) < 5 * math.sqrt(p * (1 - p) / reps))


def canonical_form(g: Graph) -> int:
    """Minimum adjacency bitstring over all vertex relabellings (n <= 7)."""
    n = g.n
    best = None
    for perm in itertools.permutations(range(n)):
        bits = 0
        k = 0
        for u in range(n):
            for v in range(u + 1, n):
                if g.has_edge(perm[u], perm[v]):
                    bits |= 1 << k
                k += 1
        if best is None or bits < best:
            best = bits
    return best


class TestSandwich:
    def test_nesting(self):
        for seed in range(20):
            c = P.sample_sandwich(30, 0.2, 0.1, seed=seed)
            assert c.g_minus.edge_set() <= c.g_plus.edge_set()

    def test_slice_nesting_and_range(self):
        c = P.sample_sandwich(25, 0.25, 0.12, seed=4)
        lo, hi = c.g_minus.m, c.g_plus.m
        prev = None
        for m in range(lo, hi + 1):
            g = P.sandwich_slice(c, m)
            assert g.m == m
            if prev is not None:
                assert prev.edge_set() <= g.edge_set()
            prev = g
        with pytest.raises(P.CouplingRangeError):
            P.sandwich_slice(c, lo - 1)
        with pytest.raises(P.CouplingRangeError):
            P.sandwich_slice(c, hi + 1)

    def test_p1_formula(self):
        c = P.sample_sandwich(10, 0.3, 0.1, seed=0)
        assert c.p1 == pytest.approx(1 - (1 - 0.3) * (1 - 0.1))

    @pytest.mark.slow
    def test_slice_marginal_matches_uniform(self):
        """Conditioned on the slice being feasible, slice(m) should look
        like a uniform m-edge graph; compare isomorphism-class frequencies
        on n = 6, m = 7 against direct uniform sampling."""
        n, m, reps = 6, 7, 400
        rng = np.random.default_rng(99)

        def uniform_m_graph():
            idx = rng.choice(P.num_pairs(n), size=m, replace=False)
            us, vs = P.pairs_from_indices(np.sort(idx), n)
            return Graph.from_edges(n, list(zip(map(int, us), map(int, vs))))

        slice_counts: dict[int, int] = {}
        direct_counts: dict[int, int] = {}
        got = 0
        seed = 0
        while got < reps:
            seed += 1
            c = P.sample_sandwich(n, 0.45, 0.2, seed=seed)
            if not (c.g_minus.m <= m <= c.g_plus.m):
                continue
            got += 1
            key = canonical_form(P.sandwich_slice(c, m))
            slice_counts[key] = slice_counts.get(key, 0) + 1
        for _ in range(reps):
            key = canonical_form(uniform_m_graph())
            direct_counts[key] = direct_counts.get(key, 0) + 1

        # total-variation distance between empirical class distributions
        keys = set(slice_counts) | set(direct_counts)
        tv = 0.5 * sum(abs(slice_counts.get(k, 0) - direct_counts.get(k, 0))
                       for k in keys) / reps
        assert tv < 0.35  # two empirical 400-sample draws are this close
