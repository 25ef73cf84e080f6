"""Rotation-extension Hamiltonicity engine.

Path rotations with a fixed endpoint, endpoint closures with replayable
transcripts, booster bookkeeping, sparse backbone construction with
tiny-path contraction, and exact subset-DP oracles for small graphs.
The search itself never reports an unverified cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .adversary import DeletionPlan
from .classify import _short_cycles_through
from .graph import Edge, Graph, neighborhood_within
from .process import SandwichCoupling, derive_seed, rng_from_seed

EXACT_CAP = 20
BOOSTER_CAP = 16


# -- paths and rotations -------------------------------------------------


@dataclass(frozen=True)
class PathState:
    """Simple path v0..vl; the *last* vertex is the fixed endpoint, the
    first is the free one."""

    seq: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.seq)) != len(self.seq):
            raise ValueError("path vertices must be distinct")

    @property
    def free_end(self) -> int:
        return self.seq[0]

    @property
    def fixed_end(self) -> int:
        return self.seq[-1]

    def __len__(self) -> int:
        return len(self.seq)


def check_path(g: Graph, p: PathState) -> None:
    for u, v in zip(p.seq, p.seq[1:]):
        if not g.has_edge(u, v):
            raise ValueError(f"({u}, {v}) is not an edge")


def rotate(p: PathState, pivot_index: int, g: Graph | None = None) -> PathState:
    """Rotate around the free endpoint using the chord {v0, v_i}.

    Returns v_{i-1}, .., v0, v_i, .., vl; the new free endpoint is
    v_{i-1} and the fixed endpoint is unchanged.
    """
    seq = p.seq
    if not (2 <= pivot_index <= len(seq) - 1):
        raise ValueError(f"pivot index {pivot_index} out of range")
    if g is not None and not g.has_edge(seq[0], seq[pivot_index]):
        raise ValueError(
            f"chord ({seq[0]}, {seq[pivot_index]}) missing; not a valid pivot")
    i = pivot_index
    return PathState(seq=tuple(reversed(seq[:i])) + seq[i:])


def extend(p: PathState, g: Graph) -> PathState | None:
    """Append an off-path neighbour at an endpoint (free end preferred)."""
    on_path = set(p.seq)
    for u in sorted(g.neighbors(p.free_end)):
        if u not in on_path:
            return PathState(seq=(u,) + p.seq)
    for u in sorted(g.neighbors(p.fixed_end)):
        if u not in on_path:
            return PathState(seq=p.seq + (u,))
    return None


def _closure_raw(g_work: Graph, p: PathState, allowed: frozenset[int] | None,
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    indptr, indices = g_work.csr()
    allow = np.zeros(g_work.n, dtype=np.uint8)
    if allowed is None:
        for v in g_work.active:
            allow[v] = 1
    else:
        for v in allowed:
            allow[v] = 1
    path = np.asarray(p.seq, dtype=np.int32)
    return _kernels.rotation_closure(path, indptr, indices, allow)


def _transcript(parents: np.ndarray, pivots: np.ndarray, s: int) -> tuple[int, ...]:
    out: list[int] = []
    while s > 0:
        out.append(int(pivots[s]))
        s = int(parents[s])
    return tuple(reversed(out))


def endpoint_closure(g_work: Graph, p: PathState,
                     allowed_pivots: frozenset[int] | None = None,
                     ) -> tuple[frozenset[int], dict[int, tuple[int, ...]]]:
    """All free endpoints reachable by rotations holding the fixed end.

    A rotation with pivot u is admitted only when u and its two path
    neighbours are all in ``allowed_pivots`` (None = everything).  One
    replayable pivot transcript is kept per endpoint.
    """
    paths, parents, pivots = _closure_raw(g_work, p, allowed_pivots)
    endpoints: dict[int, tuple[int, ...]] = {}
    for s in range(paths.shape[0]):
        e = int(paths[s, 0])
        if e not in endpoints:
            endpoints[e] = _transcript(parents, pivots, s)
    return frozenset(endpoints), endpoints


def replay_transcript(g_work: Graph, p: PathState,
                      transcript: tuple[int, ...]) -> PathState:
    """Re-apply a pivot transcript; validates every chord on the way."""
    cur = p
    for pivot in transcript:
        idx = cur.seq.index(pivot)
        cur = rotate(cur, idx, g_work)
    return cur


# -- exact oracles -------------------------------------------------------


def _bitmask_adj(g: Graph) -> tuple[list[int], np.ndarray]:
    verts = sorted(g.active)
    index = {v: i for i, v in enumerate(verts)}
    adj = np.zeros(len(verts), dtype=np.uint64)
    for v in verts:
        mask = 0
        for u in g.neighbors(v):
            mask |= 1 << index[u]
        adj[index[v]] = mask
    return verts, adj


def is_hamiltonian(g: Graph) -> bool:
    """Exact Hamiltonicity test, n_active <= 20."""
    k = g.n_active
    if k > EXACT_CAP:
        raise ValueError(f"exact oracle capped at {EXACT_CAP} vertices")
    if k < 3:
        return False
    verts, adj = _bitmask_adj(g)
    reach = _kernels.ham_reach_table(adj)
    full = (1 << k) - 1
    return bool(int(reach[full]) & int(adj[0]) & ~1)


def hamilton_exact(g: Graph) -> list[int] | None:
    """A Hamilton cycle (vertex list) if one exists, else None; n <= 20."""
    k = g.n_active
    if k > EXACT_CAP:
        raise ValueError(f"exact oracle capped at {EXACT_CAP} vertices")
    if k < 3:
        return None
    verts, adj = _bitmask_adj(g)
    reach = _kernels.ham_reach_table(adj)
    full = (1 << k) - 1
    closers = int(reach[full]) & int(adj[0]) & ~1
    if not closers:
        return None
    # walk the DP table backwards from a closing endpoint
    end = (closers & -closers).bit_length() - 1
    order = [end]
    mask = full
    cur = end
    while mask != 1:
        mask ^= 1 << cur
        prev_opts = int(reach[mask]) & int(adj[cur])
        assert prev_opts, "reach table inconsistent"
        cur = (prev_opts & -prev_opts).bit_length() - 1
        order.append(cur)
    assert order[-1] == 0
    return [verts[i] for i in reversed(order)]


def longest_path_exact(g: Graph) -> int:
    """Vertex count of a longest simple path; n_active <= 20."""
    k = g.n_active
    if k > EXACT_CAP:
        raise ValueError(f"exact oracle capped at {EXACT_CAP} vertices")
    if k == 0:
        return 0
    _, adj = _bitmask_adj(g)
    return int(_kernels.longest_path_order(adj))


def verify_hamilton_cycle(g: Graph, cycle) -> bool:
    """True iff the cycle visits every active vertex exactly once and all
    consecutive pairs (cyclically) are edges of g."""
    if cycle is None:
        return False
    cyc = list(cycle)
    if len(cyc) != g.n_active or len(cyc) < 3:
        return False
    if set(cyc) != set(g.active):
        return False
    return all(g.has_edge(cyc[i], cyc[(i + 1) % len(cyc)])
               for i in range(len(cyc)))


# -- boosters ------------------------------------------------------------


@dataclass(frozen=True)
class BoosterSet:
    v: int
    companions: frozenset[int]
    exactness: str  # "exact" | "rotation-derived"

    def __post_init__(self) -> None:
        if self.v in self.companions:
            raise ValueError("a vertex is not its own booster companion")


def boosters_exact(g: Graph, v: int, cap: int = BOOSTER_CAP) -> BoosterSet:
    """All non-neighbours u of v such that g + {u, v} is Hamiltonian or
    has a longer longest path.  If g is already Hamiltonian every non-edge
    qualifies (callers should short-circuit on Hamiltonicity first)."""
    k = g.n_active
    if k > cap:
        raise ValueError(f"exact booster computation capped at {cap} vertices")
    non_nbrs = sorted(g.active - g.neighbors(v) - {v})
    if is_hamiltonian(g):
        return BoosterSet(v=v, companions=frozenset(non_nbrs), exactness="exact")
    base = longest_path_exact(g)
    companions = []
    for u in non_nbrs:
        g2 = g.add_edges([(u, v)])
        if longest_path_exact(g2) > base or is_hamiltonian(g2):
            companions.append(u)
    return BoosterSet(v=v, companions=frozenset(companions), exactness="exact")


def rotation_booster_pairs(g_work: Graph, p: PathState,
                           allowed: frozenset[int] | None = None,
                           endpoint_cap: int = 16, exact: bool = False,
                           ) -> list[tuple[int, int]]:
    """Candidate booster pairs from a two-sided rotation closure.

    Rotates the free end, then the fixed end of each derived path; emits
    (new free end, new fixed end) pairs that are non-edges of g_work.
    With ``exact=True`` (n_active <= 16) pairs are emitted only when the
    input path is confirmed longest and its vertex set either spans the
    graph or has an outside neighbour, which makes every emitted pair a
    true booster; otherwise pairs are an under-approximation heuristic.
    """
    if exact:
        if g_work.n_active > BOOSTER_CAP:
            raise ValueError("exact gating capped at 16 vertices")
        if longest_path_exact(g_work) != len(p):
            return []
        on_path = set(p.seq)
        if len(on_path) < g_work.n_active:
            fringe = any(g_work.neighbors(v) - on_path for v in p.seq)
            if not fringe:
                # the path spans a full component; a closing chord cannot
                # lengthen anything
                return []
    paths, _, _ = _closure_raw(g_work, p, allowed)
    pairs: set[tuple[int, int]] = set()
    limit = min(paths.shape[0], endpoint_cap)
    for s in range(limit):
        left = PathState(seq=tuple(int(x) for x in paths[s][::-1]))
        rpaths, _, _ = _closure_raw(g_work, left, allowed)
        for t in range(rpaths.shape[0]):
            a, b = int(rpaths[t, 0]), int(rpaths[t, -1])
            if not g_work.has_edge(a, b):
                pairs.add((min(a, b), max(a, b)))
    return sorted(pairs)


# -- backbone construction ----------------------------------------------


@dataclass(frozen=True)
class HamParams:
    eps: float = 0.2
    K: int = 20
    L: int = 5
    mu: float = 0.25
    delta_a: float = 0.25
    restarts: int = 24
    max_iters: int | None = None
    two_sided_cap: int = 12
    p5_samples: int = 20
    gq_resamples: int = 3


@dataclass(frozen=True)
class ContractionEntry:
    synthetic: int
    u: int
    middle: int | None
    v: int
    edge_u: Edge  # retained edge incident to u (as synthetic-side edge)
    edge_v: Edge


@dataclass(frozen=True)
class ContractionMap:
    entries: dict[int, ContractionEntry]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class BackboneWitness:
    u: frozenset[int]
    w1: frozenset[int]
    w2: frozenset[int]
    alpha: float
    K: int
    q: float
    violations: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


class BackboneError(ValueError):
    """Structural precondition failed; ``witness`` names the offenders."""

    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


def _validate_backbone(gamma: Graph, wit: BackboneWitness, rng) -> None:
    n = gamma.n_active
    logn2 = math.log(max(n, 3)) ** 2
    if len(wit.w1 | wit.w2) > n / logn2:
        wit.violations.append(
            f"P1: |W1 u W2| = {len(wit.w1 | wit.w2)} > n/log^2 n = {n / logn2:.1f}")
    for v in sorted(wit.w1):
        if gamma.degree(v) != 2:
            wit.violations.append(f"P2: deg({v}) = {gamma.degree(v)} != 2 in W1")
    for v in sorted(wit.w2):
        if gamma.degree(v) < 2 * wit.K:
            wit.violations.append(
                f"P2: deg({v}) = {gamma.degree(v)} < 2K = {2 * wit.K} in W2")
    # P3 is a hard invariant of the contraction, not a statistical one
    for v in sorted(wit.w1):
        hit = neighborhood_within(gamma, v, 2) & wit.w1 - {v}
        if hit:
            raise AssertionError(
                f"P3 broken after contraction: W1 vertices {v} and {min(hit)}")
    for v in sorted(gamma.active):
        nb2 = neighborhood_within(gamma, v, 2) - {v}
        if len(nb2 & wit.w1) > 2:
            wit.violations.append(f"P4: |N^2({v}) n W1| = {len(nb2 & wit.w1)} > 2")
        if len(nb2 & wit.w2) > wit.K:
            wit.violations.append(
                f"P4: |N^2({v}) n W2| = {len(nb2 & wit.w2)} > K = {wit.K}")
    # P5 on a witness family: singletons plus sampled sets per size class
    u_sorted = sorted(wit.u)
    if not u_sorted:
        return
    small_bound = wit.K / wit.q if wit.q > 0 else len(u_sorted)
    targets = [(1, int(math.sqrt(n * wit.q)))]
    sizes = {max(2, min(len(u_sorted), int(small_bound))),
             max(2, min(len(u_sorted), int(small_bound) // 2 or 2))}

    def expansion_ok(size: int) -> None:
        need = (size * math.sqrt(n * wit.q) if size < small_bound
                else (0.5 + wit.alpha / 2) * n)
        for _ in range(max(1, len(targets))):
            pick = rng.choice(len(u_sorted), size=size, replace=False)
            s = {u_sorted[int(i)] for i in pick}
            nbhd = set()
            for v in s:
                nbhd |= gamma.neighbors(v)
            nbhd -= s
            if len(nbhd) < need:
                wit.violations.append(
                    f"P5: |N(S)| = {len(nbhd)} < {need:.1f} for |S| = {size}")
                return

    for v in u_sorted:
        need = math.sqrt(n * wit.q)
        if 1 < small_bound and gamma.degree(v) < need:
            wit.violations.append(
                f"P5: singleton {v} expands to {gamma.degree(v)} < {need:.1f}")
            break
    for size in sorted(sizes):
        if size <= len(u_sorted):
            expansion_ok(size)


def build_backbone(g: Graph, sandwich: SandwichCoupling, plan: DeletionPlan,
                   cls, params: HamParams, seed: int,
                   ) -> tuple[Graph, BackboneWitness, ContractionMap, Graph, Graph]:
    """Sparse backbone for the rotation engine.

    ``g`` is the working 2-core; its active set is the vertex universe V.
    G_q keeps each lower-slice edge with probability mu/4 (restricted to
    V); H_q = H intersect G_q.  Gamma' = G_q[U'] - H_q[U'] plus budgeted
    real edges at tiny (degree exactly 2) and atypical-or-degenerate
    (degree >= K-2) vertices, then every tiny-tiny path of length <= 2 is
    contracted into a synthetic vertex keeping the two outside edges.

    Returns (gamma, witness, cmap, gq, hq); the witness records P1-P5
    violations instead of raising (P3 excepted, it must hold by
    construction).  Scatter preconditions on g raise BackboneError.
    """
    rng = rng_from_seed(seed)
    verts = frozenset(g.active)
    n = len(verts)
    if n == 0:
        raise ValueError("empty working graph")
    p0 = sandwich.p0
    q = (params.mu / 4.0) * p0

    # contraction is well defined only when tiny vertices do not clump:
    # pairs at distance <= 2 are fine (they get contracted), but no tiny
    # vertex may have two such partners, no third neighbourhood may hold
    # three tiny vertices, and no cycle of length <= 6 may carry two
    tiny_all = frozenset(cls.tiny) & verts
    for v in sorted(tiny_all):
        partners = neighborhood_within(g, v, 2) & tiny_all - {v}
        if len(partners) > 1:
            raise BackboneError(
                "a tiny vertex has two tiny partners within distance 2",
                (v, tuple(sorted(partners))))
    for v in sorted(verts):
        close_tiny = neighborhood_within(g, v, 3) & tiny_all - {v}
        if len(close_tiny) > 2:
            raise BackboneError(
                "tiny vertices clump in the working graph",
                (v, tuple(sorted(close_tiny))))
    for v in sorted(tiny_all):
        for cyc in _short_cycles_through(g, v, 6):
            hit = set(cyc) & tiny_all
            if len(hit) < 2:
                continue
            if len(hit) == 2:
                a, b = sorted(hit)
                # a contractable pair (distance <= 2) may share a cycle
                if b in neighborhood_within(g, a, 2):
                    continue
            raise BackboneError(
                "a short cycle carries two far-apart tiny vertices", cyc)

    real = g.subtract_edges(plan.h)
    alpha = params.eps / 4.0
    hq_cap = (0.5 - 2 * alpha) * n * q

    gq = hq = None
    for attempt in range(params.gq_resamples + 1):
        keep = []
        lower_edges = [e for e in sandwich.g_minus.edges()
                       if e[0] in verts and e[1] in verts]
        flips = rng.random(len(lower_edges))
        keep = [e for e, f in zip(lower_edges, flips) if f < params.mu / 4.0]
        gq = Graph.from_edges(g.n, keep).with_mask(verts)
        hq = Graph.from_edges(g.n, [e for e in keep if e in plan.h]).with_mask(verts)
        if hq.max_degree() <= hq_cap or attempt == params.gq_resamples:
            break

    # degenerate vertices: unexpectedly sparse in G_q or heavy in H_q
    low = (1 - 2 * params.delta_a) * n * q
    high = (0.5 - params.eps / 2) * n * q
    degen = frozenset(v for v in verts
                      if gq.degree(v) < low or hq.degree(v) > high)

    w1p = cls.tiny & verts
    w2p = ((cls.atyp | degen) & verts) - w1p
    up = verts - w1p - w2p

    # Gamma': sparsified typical core plus budgeted real edges at W1'/W2'
    edges: set[Edge] = set()
    for u, v in gq.edges():
        if u in up and v in up and not hq.has_edge(u, v):
            edges.add((u, v))
    deg: dict[int, int] = {}

    def bump(e: Edge) -> None:
        edges.add(e)
        deg[e[0]] = deg.get(e[0], 0) + 1
        deg[e[1]] = deg.get(e[1], 0) + 1

    for e in edges:
        deg[e[0]] = deg.get(e[0], 0) + 1
        deg[e[1]] = deg.get(e[1], 0) + 1
    for v in sorted(w1p):
        nbrs = sorted(real.neighbors(v), key=lambda u: (u in w1p, u in w2p, u))
        for u in nbrs[:2]:
            e = (min(u, v), max(u, v))
            if e not in edges:
                bump(e)
        if deg.get(v, 0) != 2:
            raise BackboneError(
                f"tiny vertex {v} cannot reach degree 2 in the backbone", (v,))
    for v in sorted(w2p):
        if deg.get(v, 0) >= params.K - 2:
            continue
        for u in sorted(real.neighbors(v)):
            if u in w1p:
                continue  # W1' degrees are frozen at exactly 2
            e = (min(u, v), max(u, v))
            if e not in edges:
                bump(e)
                if deg.get(v, 0) >= params.K - 2:
                    break

    gamma_prime = Graph.from_edges(g.n, edges).with_mask(verts)

    # contract every tiny-tiny path of length <= 2
    pair_paths: list[tuple[int, int | None, int]] = []
    used: set[int] = set()
    for v in sorted(w1p):
        if v in used:
            continue
        for u in sorted(gamma_prime.neighbors(v)):
            if u in w1p and u > v and u not in used:
                pair_paths.append((v, None, u))
                used |= {u, v}
                break
        else:
            for w in sorted(gamma_prime.neighbors(v)):
                hit = sorted(x for x in gamma_prime.neighbors(w) & w1p
                             if x > v and x not in used)
                if hit:
                    pair_paths.append((v, w, hit[0]))
                    used |= {v, hit[0]}
                    break

    entries: dict[int, ContractionEntry] = {}
    n_gamma = g.n + len(pair_paths)
    absorbed: set[int] = set()
    synth_edges: list[Edge] = []
    for i, (u, w, v) in enumerate(pair_paths):
        x = g.n + i
        path_verts = {u, v} | ({w} if w is not None else set())
        out_u = sorted(gamma_prime.neighbors(u) - path_verts)
        out_v = sorted(gamma_prime.neighbors(v) - path_verts)
        if not out_u or not out_v:
            raise BackboneError(
                f"contracted path at {u}-{v} lacks outside edges", (u, v))
        entries[x] = ContractionEntry(synthetic=x, u=u, middle=w, v=v,
                                      edge_u=(u, out_u[0]), edge_v=(v, out_v[0]))
        absorbed |= path_verts
        synth_edges.append((out_u[0], x))
        if (out_v[0], x) != (out_u[0], x):
            synth_edges.append((out_v[0], x))

    keep_verts = (verts - absorbed) | set(entries)
    gamma_edges = [e for e in edges
                   if e[0] not in absorbed and e[1] not in absorbed]
    gamma_edges += [e for e in synth_edges if e[0] not in absorbed]
    gamma = Graph.from_edges(n_gamma, set(gamma_edges)).with_mask(keep_verts)

    x_set = frozenset(entries)
    y_set = frozenset(w for (_, w, _) in pair_paths if w is not None)
    z_set = frozenset(v for (u, _, v2) in pair_paths for v in (u, v2))
    wit = BackboneWitness(
        u=frozenset(up - y_set),
        w1=frozenset((w1p - z_set) | x_set),
        w2=frozenset(w2p - y_set),
        alpha=alpha, K=max(1, params.K // 10), q=q)
    _validate_backbone(gamma, wit, rng)
    cmap = ContractionMap(entries=entries)
    return gamma, wit, cmap, gq, hq


def expand_cycle(cycle: list[int], cmap: ContractionMap) -> list[int]:
    """Split every synthetic vertex back into its contracted path."""
    if not cmap.entries:
        return list(cycle)
    out: list[int] = []
    k = len(cycle)
    for i, x in enumerate(cycle):
        if x not in cmap.entries:
            out.append(x)
            continue
        ent = cmap.entries[x]
        prev_v, next_v = cycle[i - 1], cycle[(i + 1) % k]
        boundary = {ent.edge_u[1]: "u", ent.edge_v[1]: "v"}
        if prev_v not in boundary or next_v not in boundary:
            raise AssertionError(
                f"cycle enters synthetic vertex {x} via a non-retained edge")
        middle = [ent.middle] if ent.middle is not None else []
        if boundary[prev_v] == "u":
            out.extend([ent.u] + middle + [ent.v])
        else:
            out.extend([ent.v] + middle + [ent.u])
    return out


# -- the search ----------------------------------------------------------


@dataclass
class SearchReport:
    found: bool
    cycle: list[int] | None
    iterations: int
    restarts: int
    best_path_len: int
    e_prime_used: int
    backbone_violations: list[str] = field(default_factory=list)
    booster_pairs_tried: int = 0

    def to_json(self) -> dict:
        return {"found": self.found, "cycle": self.cycle,
                "iterations": self.iterations, "restarts": self.restarts,
                "best_path_len": self.best_path_len,
                "e_prime_used": self.e_prime_used,
                "backbone_violations": self.backbone_violations,
                "booster_pairs_tried": self.booster_pairs_tried}


def _random_maximal_path(work: Graph, rng) -> PathState:
    verts = sorted(work.active)
    start = verts[int(rng.integers(len(verts)))]
    seq = [start]
    on = {start}
    for endidx in (0, -1):
        while True:
            cand = [u for u in work.neighbors(seq[endidx]) if u not in on]
            if not cand:
                break
            u = cand[int(rng.integers(len(cand)))]
            on.add(u)
            if endidx == 0:
                seq.insert(0, u)
            else:
                seq.append(u)
    return PathState(seq=tuple(seq))


def _try_reopen(work: Graph, cycle: list[int], rng) -> PathState | None:
    """Open a non-spanning cycle at a vertex with an off-cycle neighbour
    and absorb that neighbour, producing a strictly longer path."""
    on = set(cycle)
    k = len(cycle)
    order = rng.permutation(k)
    for idx in order:
        i = int(idx)
        x = cycle[i]
        outside = [u for u in work.neighbors(x) if u not in on]
        if outside:
            y = outside[int(rng.integers(len(outside)))]
            seq = cycle[i + 1:] + cycle[:i + 1]  # ends at x
            return PathState(seq=tuple(seq) + (y,))
    return None


def hamilton_search(g: Graph, plan: DeletionPlan, cls=None,
                    params: HamParams | None = None, seed: int = 0,
                    sandwich: SandwichCoupling | None = None,
                    ) -> tuple[list[int] | None, SearchReport]:
    """Rotation-extension search for a Hamilton cycle of g - plan.h.

    Requires min degree >= 2 (run 2-core peeling first).  By default the
    search works directly on g - plan.h.  With a sandwich coupling and a
    classification it instead builds a sparse backbone from the lower
    slice and sprinkles booster edges from the full graph (at most n
    additions).  Every returned cycle passes verify_hamilton_cycle
    against g - plan.h; failure is reported, never raised.
    """
    if params is None:
        params = HamParams()
    real = g.subtract_edges(plan.h)
    if real.n_active and real.min_degree() < 2:
        raise ValueError("minimum degree below 2; peel to the 2-core first")
    report = SearchReport(found=False, cycle=None, iterations=0, restarts=0,
                          best_path_len=0, e_prime_used=0)
    if real.n_active < 3:
        return None, report

    rng = rng_from_seed(seed)
    cmap = ContractionMap(entries={})
    e_prime: set[Edge] = set()

    if sandwich is not None and cls is not None:
        try:
            gamma, wit, cmap, gq, hq = build_backbone(
                g, sandwich, plan, cls, params, derive_seed(seed, 1))
        except BackboneError as exc:
            report.backbone_violations.append(str(exc))
            return None, report
        report.backbone_violations = list(wit.violations)
        work = gamma
        allowed = wit.u
        # booster reservoir: lower-slice edges inside U, minus the plan
        reservoir = sandwich.g_minus.subtract_edges(plan.h).with_mask(
            wit.u & sandwich.g_minus.active)
    else:
        work = real
        allowed = frozenset(work.active)
        reservoir = None  # closing chords come from the working graph itself

    max_iters = params.max_iters or max(64, 4 * work.n_active)

    def finish(cycle_work: list[int]) -> list[int] | None:
        cyc = expand_cycle(cycle_work, cmap) if cmap.entries else cycle_work
        return cyc if verify_hamilton_cycle(real, cyc) else None

    for restart in range(params.restarts + 1):
        report.restarts = restart
        path = _random_maximal_path(work, rng)
        for _ in range(max_iters):
            report.iterations += 1
            nxt = extend(path, work)
            while nxt is not None:
                path = nxt
                nxt = extend(path, work)
            report.best_path_len = max(report.best_path_len, len(path))
            spanning = len(path) == work.n_active

            # direct closing chord
            if work.has_edge(path.free_end, path.fixed_end):
                cycle = list(path.seq)
                if spanning:
                    got = finish(cycle)
                    if got is not None:
                        report.found = True
                        report.cycle = got
                        report.e_prime_used = len(e_prime)
                        return got, report
                reopened = _try_reopen(work, cycle, rng)
                if reopened is not None:
                    path = reopened
                    continue

            # rotate the free end, look for closures or extensions
            paths, parents, pivots = _closure_raw(work, path, allowed)
            progressed = False
            for s in range(paths.shape[0]):
                cand = PathState(seq=tuple(int(x) for x in paths[s]))
                if work.has_edge(cand.free_end, cand.fixed_end):
                    cycle = list(cand.seq)
                    if spanning:
                        got = finish(cycle)
                        if got is not None:
                            report.found = True
                            report.cycle = got
                            report.e_prime_used = len(e_prime)
                            return got, report
                    reopened = _try_reopen(work, cycle, rng)
                    if reopened is not None:
                        path = reopened
                        progressed = True
                        break
                ext = extend(cand, work)
                if ext is not None:
                    path = ext
                    progressed = True
                    break
            if progressed:
                continue

            # two-sided rotations: collect booster pairs and sprinkle
            closed = False
            limit = min(paths.shape[0], params.two_sided_cap)
            for s in range(limit):
                left = PathState(seq=tuple(int(x) for x in paths[s][::-1]))
                rpaths, _, _ = _closure_raw(work, left, allowed)
                for t in range(rpaths.shape[0]):
                    a, b = int(rpaths[t, 0]), int(rpaths[t, -1])
                    if work.has_edge(a, b):
                        continue
                    report.booster_pairs_tried += 1
                    if reservoir is None or not reservoir.has_edge(a, b):
                        continue
                    if len(e_prime) >= work.n_active:
                        break
                    e = (min(a, b), max(a, b))
                    if e in e_prime:
                        continue
                    e_prime.add(e)
                    work = work.add_edges([e])
                    path = PathState(seq=tuple(int(x) for x in rpaths[t]))
                    closed = True
                    break
                if closed:
                    break
            if closed:
                continue
            break  # stuck on this restart
        if report.found:
            break
    report.e_prime_used = len(e_prime)
    return None, report
