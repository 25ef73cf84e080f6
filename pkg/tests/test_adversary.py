"""Budgets, deletion plans, and the three adversary strategies."""

import math

import pytest

from conftest import cycle_graph, random_graph
from rgres import adversary as A
from rgres import classify as C
from rgres.graph import Graph


class TestBudgets:
    def test_simple_caps(self):
        g = Graph.complete(5)  # every degree 4
        b = A.make_budget(g, "simple", alpha=0.3)
        assert all(b.cap(v) == 1 for v in range(5))  # floor(0.3 * 4)

    def test_alpha_zero_means_no_deletion(self, rng):
        g = random_graph(rng, 12, 0.4)
        b = A.make_budget(g, "simple", alpha=0.0)
        assert all(b.cap(v) == 0 for v in g.active)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            A.make_budget(Graph.complete(3), "simple", alpha=1.5)

    def test_refined_needs_classification(self):
        with pytest.raises(ValueError):
            A.make_budget(Graph.complete(4), "refined", alpha=0.3)

    def test_refined_caps_by_class(self, rng):
        g = random_graph(rng, 30, 0.4)
        p = C.density(g)
        cls = C.classify(g, p, delta_t=0.5, delta_a=0.3)
        b = A.make_budget(g, "refined", alpha=0.4, cls=cls, k_t=1, k_a=2)
        for v in g.active:
            d = g.degree(v)
            if v in cls.tiny:
                assert b.cap(v) == max(0, d - 1)
            elif v in cls.atyp:
                assert b.cap(v) == max(0, d - 2)
            else:
                assert b.cap(v) == math.floor(0.4 * d)

    def test_refined_rejects_mismatched_density(self, rng):
        g = random_graph(rng, 20, 0.5)
        cls = C.classify(g, 0.01, delta_t=0.5, delta_a=0.3)
        with pytest.raises(ValueError):
            A.make_budget(g, "refined", alpha=0.3, cls=cls)


class TestPlans:
    def test_empty_plan_valid(self, rng):
        g = random_graph(rng, 10, 0.5)
        ok, bad = A.validate_plan(g, A.empty_plan(g))
        assert ok and bad is None

    def test_validate_flags_overdraw(self):
        g = Graph.complete(4)
        b = A.Budget(caps={v: 0 for v in range(4)}, provenance={})
        plan = A.DeletionPlan(h=frozenset({(0, 1)}), budget=b)
        ok, bad = A.validate_plan(g, plan)
        assert not ok and bad in (0, 1)

    def test_validate_rejects_foreign_edges(self):
        g = cycle_graph(5)
        b = A.make_budget(g, "simple", alpha=1.0)
        plan = A.DeletionPlan(h=frozenset({(0, 2)}), budget=b)
        with pytest.raises(ValueError):
            A.validate_plan(g, plan)

    def test_plan_io_roundtrip(self, tmp_path, rng):
        g = random_graph(rng, 15, 0.4)
        b = A.make_budget(g, "simple", alpha=0.5)
        plan = A.adversary_random(g, b, seed=3)
        A.write_plan(plan, str(tmp_path / "h.txt"), str(tmp_path / "b.json"))
        back = A.read_plan(str(tmp_path / "h.txt"), str(tmp_path / "b.json"))
        assert back.h == plan.h
        assert back.budget.caps == plan.budget.caps


class TestRandomAdversary:
    def test_respects_budget(self, rng):
        for seed in range(20):
            g = random_graph(rng, 20, 0.3)
            b = A.make_budget(g, "simple", alpha=0.4)
            plan = A.adversary_random(g, b, seed=seed)
            ok, _ = A.validate_plan(g, plan)
            assert ok

    def test_maximal(self, rng):
        """No surviving edge could still be deleted within budget."""
        g = random_graph(rng, 15, 0.5)
        b = A.make_budget(g, "simple", alpha=0.5)
        plan = A.adversary_random(g, b, seed=1)
        used = {v: plan.degree_in_h(v) for v in g.active}
        for u, v in set(g.edges()) - set(plan.h):
            assert used[u] >= b.cap(u) or used[v] >= b.cap(v)

    def test_deterministic(self, rng):
        g = random_graph(rng, 20, 0.4)
        b = A.make_budget(g, "simple", alpha=0.3)
        assert A.adversary_random(g, b, 7).h == A.adversary_random(g, b, 7).h


class TestTargetedAdversary:
    def test_targets_deleted_first(self):
        g = Graph.complete(6)
        b = A.make_budget(g, "simple", alpha=0.2)  # cap 1 each
        plan = A.adversary_targeted(g, b, target=[(0, 1)], seed=0)
        assert (0, 1) in plan.h

    def test_rejects_missing_target(self):
        g = cycle_graph(5)
        b = A.make_budget(g, "simple", alpha=0.5)
        with pytest.raises(ValueError):
            A.adversary_targeted(g, b, target=[(0, 2)], seed=0)


class TestBipartitionAdversary:
    def test_witness_cross_majority(self, rng):
        for seed in range(15):
            g = random_graph(rng, 24, 0.3)
            g = C.two_core(g).core
            if not g.n_active:
                continue
            wit, plan = A.adversary_bipartition(g, seed=seed)
            ok, bad = wit.cross_majority_holds(g)
            assert ok, f"vertex {bad} keeps a same-side majority"

    def test_uncapped_plan_removes_all_internal(self, rng):
        g = random_graph(rng, 16, 0.4)
        wit, plan = A.adversary_bipartition(g, seed=2)
        rem = g.subtract_edges(plan.h)
        for u, v in rem.edges():
            assert (u in wit.v1) != (v in wit.v1)

    def test_budgeted_plan_is_legal(self, rng):
        g = random_graph(rng, 20, 0.4)
        b = A.make_budget(g, "simple", alpha=0.4)
        wit, plan = A.adversary_bipartition(g, seed=5, budget=b)
        ok, _ = A.validate_plan(g, plan)
        assert ok

    def test_partition_covers_vertices(self, rng):
        g = random_graph(rng, 18, 0.3)
        wit, _ = A.adversary_bipartition(g, seed=9)
        assert wit.v1 | wit.v2 == g.active
        assert not wit.v1 & wit.v2


class TestBudgetImplication:
    def test_direction_check_runs(self, rng):
        g = C.two_core(random_graph(rng, 30, 0.4)).core
        p = C.density(g)
        cls = C.classify(g, p, delta_t=0.3, delta_a=0.5)
        # whatever the verdict, the check must be consistent with caps
        if A.simple_budget_implies_refined(g, 0.3, cls, k_t=1, k_a=2):
            simple = A.make_budget(g, "simple", alpha=0.3)
            refined = A.make_budget(g, "refined", alpha=0.3, cls=cls,
                                    k_t=1, k_a=2)
            assert all(simple.cap(v) <= refined.cap(v) for v in g.active)
