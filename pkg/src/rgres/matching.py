"""Exact maximum matching plus the constructive perfect-matching pipeline.

The exact oracle is an augmenting-path search with blossom contraction
(O(V * E) per augmentation, greedy-initialised), good for the desk-scale
graphs this package targets.  The pipeline mirrors the greedy
saturate-then-Hall construction for sparse near-threshold graphs; every
stage checks the structural property it relies on and reports a witness
on failure rather than guessing.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .adversary import DeletionPlan
from .graph import Edge, Graph, greedy_2_independent_set, neighborhood_within
from .process import rng_from_seed


@dataclass(frozen=True)
class Matching:
    edges: frozenset[Edge]

    @property
    def saturated(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)

    def __len__(self) -> int:
        return len(self.edges)


def verify_matching(g: Graph, m: Matching) -> None:
    """Raise if the matching is not vertex-disjoint or uses foreign edges."""
    seen: set[int] = set()
    for u, v in m.edges:
        if not g.has_edge(u, v):
            raise AssertionError(f"matching edge ({u}, {v}) not in graph")
        if u in seen or v in seen:
            raise AssertionError(f"matching not vertex-disjoint at ({u}, {v})")
        seen.add(u)
        seen.add(v)


def max_matching_exact(g: Graph) -> Matching:
    """Maximum-cardinality matching via augmenting paths with blossom
    contraction (general graphs)."""
    verts = sorted(g.active)
    n = g.n
    match: dict[int, int] = {}

    # greedy initialisation cuts the number of augmenting searches
    for v in verts:
        if v not in match:
            for u in sorted(g.neighbors(v)):
                if u not in match:
                    match[v] = u
                    match[u] = v
                    break

    parent = [-1] * n
    base = list(range(n))
    in_queue = [False] * n
    in_blossom = [False] * n

    def lca(a: int, b: int) -> int:
        used_path = [False] * n
        cur = a
        while True:
            cur = base[cur]
            used_path[cur] = True
            if cur not in match:
                break
            cur = parent[match[cur]]
        cur = b
        while True:
            cur = base[cur]
            if used_path[cur]:
                return cur
            cur = parent[match[cur]]

    def mark_path(v: int, b: int, child: int) -> None:
        while base[v] != b:
            in_blossom[base[v]] = True
            in_blossom[base[match[v]]] = True
            parent[v] = child
            child = match[v]
            v = parent[match[v]]

    def find_augmenting_path(root: int) -> int:
        for i in range(n):
            parent[i] = -1
            base[i] = i
            in_queue[i] = False
        in_queue[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for to in sorted(g.neighbors(v)):
                if base[v] == base[to] or match.get(v) == to:
                    continue
                if to == root or (to in match and parent[match[to]] != -1):
                    # odd cycle: contract the blossom
                    cur_base = lca(v, to)
                    for i in range(n):
                        in_blossom[i] = False
                    mark_path(v, cur_base, to)
                    mark_path(to, cur_base, v)
                    for i in verts:
                        if in_blossom[base[i]]:
                            base[i] = cur_base
                            if not in_queue[i]:
                                in_queue[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if to not in match:
                        # augment along the path to the root
                        u = to
                        while u != -1:
                            pv = parent[u]
                            ppv = match.get(pv, -1)
                            match[u] = pv
                            match[pv] = u
                            u = ppv
                        return to
                    else:
                        w = match[to]
                        if not in_queue[w]:
                            in_queue[w] = True
                            queue.append(w)
        return -1

    for v in verts:
        if v not in match:
            find_augmenting_path(v)

    edges = frozenset((v, match[v]) if v < match[v] else (match[v], v)
                      for v in match)
    result = Matching(edges=edges)
    verify_matching(g, result)
    return result


def max_matching_brute(g: Graph) -> int:
    """Exhaustive maximum matching size; test oracle for tiny graphs.

    Considers, for the lowest-id unmatched vertex, every choice of
    partner plus the choice of leaving it unmatched, so all matchings are
    covered.  Memoised on the remaining vertex set."""
    verts = sorted(g.active)
    idx = {v: i for i, v in enumerate(verts)}
    adj = [sum(1 << idx[u] for u in g.neighbors(v)) for v in verts]
    memo: dict[int, int] = {0: 0}

    def rec(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        vbit = mask & -mask
        v = vbit.bit_length() - 1
        best = rec(mask ^ vbit)  # leave v unmatched
        opts = adj[v] & mask
        while opts:
            ubit = opts & -opts
            opts ^= ubit
            best = max(best, 1 + rec(mask ^ vbit ^ ubit))
        memo[mask] = best
        return best

    return rec((1 << len(verts)) - 1)


def has_perfect_matching(g: Graph) -> bool:
    """Perfect in the all-but-at-most-one sense: a matching covering at
    least n_active - 1 vertices."""
    return len(max_matching_exact(g)) >= g.n_active // 2


# -- bipartite matching and Hall certificates ----------------------------


def _kuhn_matching(adj: dict[int, list[int]], left: Sequence[int]) -> dict[int, int]:
    """Bipartite matching (left -> right) by augmenting DFS."""
    match_r: dict[int, int] = {}
    match_l: dict[int, int] = {}

    def try_augment(v: int, visited: set[int]) -> bool:
        for u in adj.get(v, ()):
            if u in visited:
                continue
            visited.add(u)
            if u not in match_r or try_augment(match_r[u], visited):
                match_r[u] = v
                match_l[v] = u
                return True
        return False

    import sys
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * (len(left) + 64)))
    try:
        for v in left:
            try_augment(v, set())
    finally:
        sys.setrecursionlimit(old_limit)
    return match_l


def find_hall_violation(g: Graph, a: Iterable[int], b: Iterable[int],
                        ) -> tuple[frozenset[int], frozenset[int]] | None:
    """A Hall certificate (S, N(S)) with |N(S)| < |S| if the bipartite
    graph between a and b has no perfect matching, else None.

    Extracted from the unreachable side of a maximum-matching alternating
    search (Konig-style).
    """
    aset, bset = frozenset(a), frozenset(b)
    for v in aset | bset:
        inside = g.neighbors(v) & (aset if v in aset else bset)
        if inside:
            raise ValueError(f"edge inside one part at vertex {v}")

    def violation_from(side: frozenset[int], other: frozenset[int],
                       ) -> tuple[frozenset[int], frozenset[int]] | None:
        adj = {v: sorted(g.neighbors(v) & other) for v in side}
        match_l = _kuhn_matching(adj, sorted(side))
        unmatched = [v for v in sorted(side) if v not in match_l]
        if not unmatched:
            return None
        match_r = {u: v for v, u in match_l.items()}
        # alternating BFS: free edges side->other, matched edges back
        s_set = set(unmatched)
        t_set: set[int] = set()
        queue = deque(unmatched)
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if u not in t_set:
                    t_set.add(u)
                    w = match_r.get(u)
                    if w is not None and w not in s_set:
                        s_set.add(w)
                        queue.append(w)
        return frozenset(s_set), frozenset(t_set)

    if len(aset) != len(bset):
        big, small = (aset, bset) if len(aset) > len(bset) else (bset, aset)
        vio = violation_from(big, small)
        if vio is not None:
            return vio
        # matching saturates the bigger side: impossible, |big| > |small|
        raise AssertionError("matching cannot saturate the larger side")
    vio = violation_from(aset, bset)
    if vio is not None:
        return vio
    return None


# -- the constructive pipeline -------------------------------------------


@dataclass(frozen=True)
class PMParams:
    eps: float = 0.2
    K: int = 8
    L: int = 4
    p1: float | None = None  # defaults to the working graph's density


@dataclass
class StageOutcome:
    name: str
    ok: bool
    detail: str = ""
    witness: tuple | None = None
    property_warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail,
                "witness": self.witness, "property_warnings": self.property_warnings}


@dataclass
class PipelineReport:
    stages: list[StageOutcome]
    matching: Matching | None
    success: bool
    failure_stage: str | None

    def to_json(self) -> dict:
        return {
            "stages": [s.to_json() for s in self.stages],
            "matching": sorted(self.matching.edges) if self.matching else None,
            "success": self.success,
            "failure_stage": self.failure_stage,
        }


def constructive_pm(g: Graph, plan: DeletionPlan, cls, params: PMParams,
                    seed: int) -> PipelineReport:
    """Stage-by-stage construction of a perfect matching of g - plan.h.

    ``cls`` provides ``tiny`` and ``atyp`` vertex sets (a Classification
    or sandwich-union classification).  Stages: parity fix, greedy tiny
    saturation, greedy atypical saturation, random balanced equipartition,
    degenerate-vertex matching, 2-independent-set rebalancing, bipartite
    Hall matching.  Structural side conditions are checked on the instance
    and reported; greedy failure points name the vertex that could not be
    served.
    """
    rng = rng_from_seed(seed)
    work = g.subtract_edges(plan.h)
    active = set(work.active)
    tiny = frozenset(cls.tiny) & frozenset(active)
    atyp = (frozenset(cls.atyp) | tiny) & frozenset(active)
    p1 = params.p1
    if p1 is None:
        n_act = len(active)
        p1 = work.m / (n_act * (n_act - 1) / 2) if n_act >= 2 else 0.0

    stages: list[StageOutcome] = []
    matched: dict[int, int] = {}

    def fail(stage: StageOutcome) -> PipelineReport:
        stages.append(stage)
        return PipelineReport(stages=stages, matching=None, success=False,
                              failure_stage=stage.name)

    def match_pair(u: int, v: int) -> None:
        matched[u] = v
        matched[v] = u

    # (1) parity fix
    parity = StageOutcome(name="parity-fix", ok=True)
    if len(active) % 2 == 1:
        candidates = [v for v in sorted(tiny)
                      if any(u not in tiny for u in work.neighbors(v) & active)]
        if candidates:
            drop = candidates[0]
        else:
            non_tiny = sorted(active - tiny)
            if not non_tiny:
                return fail(StageOutcome(name="parity-fix", ok=False,
                                         detail="odd order and every vertex tiny"))
            drop = non_tiny[0]
        active.discard(drop)
        parity.detail = f"removed vertex {drop}"
    stages.append(parity)

    def nbrs(v: int) -> set[int]:
        return {u for u in work.neighbors(v) if u in active}

    # (2) greedy tiny saturation
    tiny_stage = StageOutcome(name="tiny-saturation", ok=True)
    tiny_alive = [v for v in sorted(tiny) if v in active]
    for v in tiny_alive:
        close_tiny = neighborhood_within(work, v, 2) & tiny - {v}
        if close_tiny:
            tiny_stage.property_warnings.append(
                f"tiny vertices within distance 2: {v} and {sorted(close_tiny)[0]}")
    order = [tiny_alive[i] for i in rng.permutation(len(tiny_alive))]
    for v in order:
        if v in matched:
            continue
        free = [u for u in sorted(nbrs(v)) if u not in matched]
        if not free:
            return fail(StageOutcome(
                name="tiny-saturation", ok=False,
                detail=f"tiny vertex {v} has no unmatched neighbour",
                witness=(v,), property_warnings=tiny_stage.property_warnings))
        free.sort(key=lambda u: (u in atyp, u in tiny, u))
        match_pair(v, free[0])
    stages.append(tiny_stage)

    # (3) greedy atypical saturation
    atyp_stage = StageOutcome(name="atyp-saturation", ok=True)
    atyp_alive = [w for w in sorted(atyp - tiny) if w in active]
    order = [atyp_alive[i] for i in rng.permutation(len(atyp_alive))]
    for w in order:
        if w in matched:
            continue
        already = sum(1 for u in nbrs(w) if u in matched)
        if already > params.K / 2:
            atyp_stage.property_warnings.append(
                f"{already} matched neighbours of {w} exceeds K/2 = {params.K / 2}")
        free = [u for u in sorted(nbrs(w)) if u not in matched]
        if not free:
            return fail(StageOutcome(
                name="atyp-saturation", ok=False,
                detail=f"atypical vertex {w} has no unmatched neighbour",
                witness=(w,), property_warnings=atyp_stage.property_warnings))
        free.sort(key=lambda u: (u in atyp, u))
        match_pair(w, free[0])
    stages.append(atyp_stage)

    # (4) random balanced equipartition of the remainder
    u1 = sorted(v for v in active if v not in matched and v not in atyp)
    leftover_matched_free = [v for v in active if v not in matched and v in atyp]
    if leftover_matched_free:
        return fail(StageOutcome(name="equipartition", ok=False,
                                 detail="atypical vertex survived saturation",
                                 witness=tuple(leftover_matched_free[:4])))
    perm = rng.permutation(len(u1))
    half = len(u1) // 2
    a_side = {u1[i] for i in perm[:half]}
    b_side = {u1[i] for i in perm[half:]}
    eq_stage = StageOutcome(name="equipartition", ok=True,
                            detail=f"|A|={len(a_side)} |B|={len(b_side)}")
    if abs(len(a_side) - len(b_side)) > 1:
        eq_stage.ok = False
        return fail(eq_stage)
    stages.append(eq_stage)

    induced = work.with_mask(set(u1))

    # (5) degenerate vertices
    thr_a = (0.5 + params.eps / 7.0) * len(a_side) * p1
    thr_b = (0.5 + params.eps / 7.0) * len(b_side) * p1
    degen = sorted(v for v in u1
                   if len(induced.neighbors(v) & a_side) < thr_a
                   or len(induced.neighbors(v) & b_side) < thr_b)
    deg_stage = StageOutcome(name="degenerate-matching", ok=True,
                             detail=f"{len(degen)} degenerate vertices")
    degen_set = set(degen)
    for v in degen:
        close = neighborhood_within(induced, v, 2) & degen_set - {v}
        if len(close) >= params.L:
            deg_stage.property_warnings.append(
                f"{len(close)} degenerate vertices within distance 2 of {v}")
    order = [degen[i] for i in rng.permutation(len(degen))]
    for v in order:
        if v in matched:
            continue
        free = [u for u in sorted(induced.neighbors(v)) if u not in matched]
        if not free:
            return fail(StageOutcome(
                name="degenerate-matching", ok=False,
                detail=f"degenerate vertex {v} has no unmatched neighbour",
                witness=(v,), property_warnings=deg_stage.property_warnings))
        free.sort(key=lambda u: (u in degen_set, u))
        match_pair(v, free[0])
    stages.append(deg_stage)

    # (6) rebalance with a 2-independent set
    a_prime = sorted(v for v in a_side if v not in matched)
    b_prime = sorted(v for v in b_side if v not in matched)
    remainder = induced.with_mask(set(a_prime) | set(b_prime))
    reb_stage = StageOutcome(name="rebalance", ok=True)
    if len(a_prime) != len(b_prime):
        big, small = (a_prime, b_prime) if len(a_prime) > len(b_prime) else (b_prime, a_prime)
        move_count = (len(big) - len(small)) // 2
        movable = greedy_2_independent_set(remainder, big, move_count)
        if len(movable) < move_count:
            return fail(StageOutcome(
                name="rebalance", ok=False,
                detail=f"2-independent set of size {move_count} unavailable "
                       f"(got {len(movable)})"))
        big_set = set(big) - movable
        small_set = set(small) | movable
        a_final, b_final = (big_set, small_set) if len(a_prime) > len(b_prime) \
            else (small_set, big_set)
        reb_stage.detail = f"moved {len(movable)} vertices"
    else:
        a_final, b_final = set(a_prime), set(b_prime)
    stages.append(reb_stage)

    # (7) bipartite perfect matching with Hall certificate on failure
    adj = {v: sorted(remainder.neighbors(v) & b_final) for v in sorted(a_final)}
    match_l = _kuhn_matching(adj, sorted(a_final))
    hall_stage = StageOutcome(name="hall-matching", ok=True)
    if len(match_l) < len(a_final) or len(a_final) != len(b_final):
        cross = remainder.subtract_edges(
            [e for e in remainder.edges() if (e[0] in a_final) == (e[1] in a_final)])
        vio = find_hall_violation(cross, a_final, b_final)
        return fail(StageOutcome(
            name="hall-matching", ok=False,
            detail="no perfect matching between the halves",
            witness=(tuple(sorted(vio[0])), tuple(sorted(vio[1]))) if vio else None))
    for v, u in match_l.items():
        match_pair(v, u)
    stages.append(hall_stage)

    edges = frozenset((u, v) if u < v else (v, u)
                      for u, v in matched.items() if u < v or matched.get(v) != u)
    edges = frozenset((min(u, v), max(u, v)) for u, v in matched.items())
    matching = Matching(edges=edges)
    verify_matching(work, matching)
    if len(matching.saturated) < g.n_active - 1:
        return fail(StageOutcome(
            name="soundness", ok=False,
            detail=f"matching covers {len(matching.saturated)} of {g.n_active}"))
    return PipelineReport(stages=stages, matching=matching, success=True,
                          failure_stage=None)


def write_matching(m: Matching, path: str) -> None:
    with open(path, "w") as fh:
        for u, v in sorted(m.edges):
            fh.write(f"{u} {v}\n")
