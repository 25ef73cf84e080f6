"""Edge-deletion adversaries and their per-vertex budgets.

True resilience quantifies over *all* spanning subgraphs H, which no
finite strategy covers; this module provides strong named strategies plus
exact validation, and results downstream are always labelled per
strategy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .classify import Classification
from .graph import Edge, Graph, _norm_edge
from .process import rng_from_seed


@dataclass(frozen=True)
class Budget:
    """Per-vertex caps on deletable incident edges.

    simple mode:   cap(v) = floor(alpha * deg(v))
    refined mode:  cap(v) = deg(v) - K_t  for tiny v,
                   deg(v) - K_a          for atypical non-tiny v,
                   floor(alpha * deg(v)) otherwise,
    all clamped at >= 0.
    """

    caps: dict[int, int]
    provenance: dict

    def cap(self, v: int) -> int:
        return self.caps.get(v, 0)

    def to_json(self) -> dict:
        return {"caps": {str(v): c for v, c in sorted(self.caps.items())},
                "provenance": self.provenance}


def make_budget(g: Graph, mode: str, alpha: float = 0.0,
                cls: Classification | None = None,
                k_t: int = 1, k_a: int = 2) -> Budget:
    if not (0.0 <= alpha <= 1.0):
        raise ValueError("alpha must be in [0, 1]")
    caps: dict[int, int] = {}
    if mode == "simple":
        for v in g.active:
            caps[v] = math.floor(alpha * g.degree(v))
        prov = {"mode": "simple", "alpha": alpha}
    elif mode == "refined":
        if cls is None:
            raise ValueError("refined budget requires a Classification")
        n = g.n_active
        p_graph = g.m / (n * (n - 1) / 2) if n >= 2 else 0.0
        if not math.isclose(cls.p, p_graph, rel_tol=0.25) and n >= 2:
            raise ValueError(
                f"classification p={cls.p:.5g} does not match graph density {p_graph:.5g}")
        for v in g.active:
            d = g.degree(v)
            if v in cls.tiny:
                caps[v] = max(0, d - k_t)
            elif v in cls.atyp:
                caps[v] = max(0, d - k_a)
            else:
                caps[v] = math.floor(alpha * d)
        prov = {"mode": "refined", "alpha": alpha, "K_t": k_t, "K_a": k_a,
                "delta_t": cls.delta_t, "delta_a": cls.delta_a, "p": cls.p}
    else:
        raise ValueError(f"unknown budget mode {mode!r}")
    return Budget(caps=caps, provenance=prov)


@dataclass(frozen=True)
class DeletionPlan:
    h: frozenset[Edge]
    budget: Budget

    def degree_in_h(self, v: int) -> int:
        return sum(1 for e in self.h if v in e)

    def to_json(self) -> dict:
        return {"h": sorted(self.h), "budget": self.budget.to_json()}


def empty_plan(g: Graph) -> DeletionPlan:
    return DeletionPlan(h=frozenset(), budget=make_budget(g, "simple", alpha=0.0))


def validate_plan(g: Graph, plan: DeletionPlan) -> tuple[bool, int | None]:
    """True iff every per-vertex cap is respected; else (False, vertex)."""
    used: dict[int, int] = {}
    for u, v in plan.h:
        if not g.has_edge(u, v):
            raise ValueError(f"plan edge ({u}, {v}) not in graph")
        used[u] = used.get(u, 0) + 1
        used[v] = used.get(v, 0) + 1
    for v, k in sorted(used.items()):
        if k > plan.budget.cap(v):
            return False, v
    return True, None


def adversary_random(g: Graph, budget: Budget, seed: int) -> DeletionPlan:
    """Maximal-effort random plan: shuffle all edges, delete an edge iff
    both endpoints still have budget (never partially delete)."""
    rng = rng_from_seed(seed)
    edges = list(g.edges())
    remaining = dict(budget.caps)
    order = rng.permutation(len(edges))
    h: list[Edge] = []
    for i in order:
        u, v = edges[int(i)]
        if remaining.get(u, 0) > 0 and remaining.get(v, 0) > 0:
            remaining[u] -= 1
            remaining[v] -= 1
            h.append((u, v))
    return DeletionPlan(h=frozenset(h), budget=budget)


def adversary_targeted(g: Graph, budget: Budget, target: Iterable[Edge],
                       seed: int) -> DeletionPlan:
    """Delete target edges first (budget permitting), then random fill."""
    rng = rng_from_seed(seed)
    target_edges = [_norm_edge(*e) for e in target]
    for u, v in target_edges:
        if not g.has_edge(u, v):
            raise ValueError(f"target edge ({u}, {v}) not in graph")
    remaining = dict(budget.caps)
    h: list[Edge] = []
    taken: set[Edge] = set()

    def try_delete(u: int, v: int) -> None:
        if (u, v) in taken:
            return
        if remaining.get(u, 0) > 0 and remaining.get(v, 0) > 0:
            remaining[u] -= 1
            remaining[v] -= 1
            taken.add((u, v))
            h.append((u, v))

    for i in rng.permutation(len(target_edges)):
        try_delete(*target_edges[int(i)])
    rest = [e for e in g.edges() if e not in taken]
    for i in rng.permutation(len(rest)):
        try_delete(*rest[int(i)])
    return DeletionPlan(h=frozenset(h), budget=budget)


@dataclass(frozen=True)
class PartitionWitness:
    v1: frozenset[int]
    v2: frozenset[int]
    balanced: bool

    def cross_majority_holds(self, g: Graph) -> tuple[bool, int | None]:
        """Every vertex has at least half its neighbours in the other part."""
        for v in sorted(self.v1 | self.v2):
            other = self.v2 if v in self.v1 else self.v1
            d = g.degree(v)
            if 2 * len(g.neighbors(v) & other) < d:
                return False, v
        return True, None


def adversary_bipartition(g: Graph, seed: int, budget: Budget | None = None,
                          slack: int = 1, max_unbalance_attempts: int = 64,
                          ) -> tuple[PartitionWitness, DeletionPlan]:
    """Local-switching bipartition adversary.

    Starting from a random partition, switch any vertex with strictly more
    neighbours on its own side (cut size strictly increases, so this
    terminates).  At a local maximum every vertex has at least half of its
    neighbours in the other part.  If the parts are balanced, try the
    unbalancing move: relocate a vertex with >= ceil(deg/2) - slack
    neighbours on its target side and re-run switching; keep the first
    locally-max unbalanced partition found.

    H consists of all within-part edges; with a budget, deletions are
    truncated per vertex in random order.
    """
    rng = rng_from_seed(seed)
    verts = sorted(g.active)
    side = {v: int(rng.integers(0, 2)) for v in verts}

    def own_count(v: int) -> int:
        return sum(1 for u in g.neighbors(v) if side[u] == side[v])

    def local_search() -> None:
        improved = True
        while improved:
            improved = False
            for v in verts:
                own = own_count(v)
                if 2 * own > g.degree(v):
                    side[v] = 1 - side[v]
                    improved = True

    local_search()

    def sizes() -> tuple[int, int]:
        c1 = sum(1 for v in verts if side[v] == 0)
        return c1, len(verts) - c1

    c1, c2 = sizes()
    if c1 == c2:
        # unbalancing move: a vertex with roughly half its neighbours
        # on its own side can change sides without losing the majority
        attempts = 0
        candidates = [v for v in verts
                      if own_count(v) >= math.ceil(g.degree(v) / 2) - slack]
        for i in rng.permutation(len(candidates)):
            if attempts >= max_unbalance_attempts:
                break
            attempts += 1
            v = candidates[int(i)]
            saved = dict(side)
            side[v] = 1 - side[v]
            local_search()
            c1, c2 = sizes()
            if c1 != c2:
                break
            side.clear()
            side.update(saved)
        c1, c2 = sizes()

    v1 = frozenset(v for v in verts if side[v] == 0)
    v2 = frozenset(v for v in verts if side[v] == 1)
    witness = PartitionWitness(v1=v1, v2=v2, balanced=(len(v1) == len(v2)))

    internal = [e for e in g.edges() if (e[0] in v1) == (e[1] in v1)]
    if budget is None:
        h = internal
        plan_budget = Budget(caps={v: g.degree(v) for v in verts},
                             provenance={"mode": "uncapped-bipartition"})
    else:
        plan_budget = budget
        remaining = dict(budget.caps)
        h = []
        for i in rng.permutation(len(internal)):
            u, w = internal[int(i)]
            if remaining.get(u, 0) > 0 and remaining.get(w, 0) > 0:
                remaining[u] -= 1
                remaining[w] -= 1
                h.append((u, w))
    return witness, DeletionPlan(h=frozenset(h), budget=plan_budget)


# -- serialization -------------------------------------------------------


def write_plan(plan: DeletionPlan, edges_path: str, budget_path: str) -> None:
    with open(edges_path, "w") as fh:
        for u, v in sorted(plan.h):
            fh.write(f"{u} {v}\n")
    with open(budget_path, "w") as fh:
        json.dump(plan.budget.to_json(), fh, indent=2)


def read_plan(edges_path: str, budget_path: str) -> DeletionPlan:
    edges = []
    with open(edges_path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                u, v = map(int, line.split())
                edges.append(_norm_edge(u, v))
    with open(budget_path) as fh:
        d = json.load(fh)
    budget = Budget(caps={int(v): c for v, c in d["caps"].items()},
                    provenance=d["provenance"])
    return DeletionPlan(h=frozenset(edges), budget=budget)


def simple_budget_implies_refined(g: Graph, alpha: float, cls: Classification,
                                  k_t: int, k_a: int) -> bool:
    """Checkable direction of the budget-implication condition: under
    (1 - alpha) * delta_t * n * p >= K_a >= K_t and d - floor(alpha d) >= K_t
    for the minimum degree d, every simple-budget plan is legal under the
    refined budget."""
    n = g.n_active
    d = g.min_degree()
    cond = ((1 - alpha) * cls.delta_t * n * cls.p >= k_a >= k_t
            and d - math.floor(alpha * d) >= k_t)
    if not cond:
        return False
    simple = make_budget(g, "simple", alpha=alpha)
    refined = make_budget(g, "refined", alpha=alpha, cls=cls, k_t=k_t, k_a=k_a)
    return all(simple.cap(v) <= refined.cap(v) for v in g.active)
