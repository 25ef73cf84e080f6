"""2-cores, tiny/atypical/degenerate vertex sets, and finite-n checks of
the structural properties the solvers rely on.

Every check here is evaluated on the concrete instance; reports carry
re-checkable witnesses rather than probability bounds.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .graph import Graph, edge_count_between, neighborhood_within
from .process import rng_from_seed


@dataclass(frozen=True)
class CoreResult:
    core: Graph  # vertex-masked subgraph with min degree >= 2 (or empty)
    removed: tuple[int, ...]  # peeling order


def two_core(g: Graph) -> CoreResult:
    """Peel vertices of degree <= 1 to exhaustion.

    The result is the unique maximal subgraph of minimum degree >= 2,
    independent of peeling order; the order actually used is recorded.
    """
    deg = {v: len(g.neighbors(v) & g.active) for v in g.active}
    queue = deque(v for v, d in sorted(deg.items()) if d <= 1)
    removed: list[int] = []
    gone: set[int] = set()
    while queue:
        v = queue.popleft()
        if v in gone:
            continue
        gone.add(v)
        removed.append(v)
        for u in g.neighbors(v):
            if u in deg and u not in gone:
                deg[u] -= 1
                if deg[u] <= 1:
                    queue.append(u)
    keep = g.active - gone
    return CoreResult(core=g.with_mask(keep), removed=tuple(removed))


def remove_isolated(g: Graph) -> Graph:
    keep = {v for v in g.active if g.neighbors(v) & g.active}
    return g.with_mask(keep)


@dataclass(frozen=True)
class Classification:
    """Tiny/atypical vertex sets of a graph against a reference density p.

    tiny  = {v : deg(v) < delta_t * n * p}
    atyp  = {v : deg(v) outside (1 +- delta_a) * n * p}
    where n is the number of active vertices.
    """

    p: float
    delta_t: float
    delta_a: float
    tiny: frozenset[int]
    atyp: frozenset[int]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "delta_t": self.delta_t,
            "delta_a": self.delta_a,
            "tiny": sorted(self.tiny),
            "atyp": sorted(self.atyp),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Classification":
        return cls(
            p=d["p"],
            delta_t=d["delta_t"],
            delta_a=d["delta_a"],
            tiny=frozenset(d["tiny"]),
            atyp=frozenset(d["atyp"]),
        )


def classify(g: Graph, p: float, delta_t: float, delta_a: float) -> Classification:
    if not (0.0 < p <= 1.0):
        raise ValueError("p must be in (0, 1]")
    n = g.n_active
    tiny_thresh = delta_t * n * p
    lo, hi = (1.0 - delta_a) * n * p, (1.0 + delta_a) * n * p
    tiny, atyp = set(), set()
    for v in g.active:
        d = g.degree(v)
        if d < tiny_thresh:
            tiny.add(v)
        if not (lo <= d <= hi):
            atyp.add(v)
    return Classification(p=p, delta_t=delta_t, delta_a=delta_a,
                          tiny=frozenset(tiny), atyp=frozenset(atyp))


def density(g: Graph) -> float:
    n = g.n_active
    if n < 2:
        return 0.0
    return g.m / (n * (n - 1) / 2)


@dataclass(frozen=True)
class SandwichSets:
    """Tiny/atyp sets taken as the union over (G^-, p0) and (G^+, p1)."""

    tiny: frozenset[int]
    atyp: frozenset[int]
    p0: float
    p1: float
    delta_t: float
    delta_a: float


def classify_sandwich(g_minus: Graph, g_plus: Graph, p0: float, p1: float,
                      delta_t: float, delta_a: float,
                      restrict_to: Iterable[int] | None = None) -> SandwichSets:
    cm = classify(g_minus, p0, delta_t, delta_a)
    cp = classify(g_plus, p1, delta_t, delta_a)
    tiny = cm.tiny | cp.tiny
    atyp = cm.atyp | cp.atyp
    if restrict_to is not None:
        keep = frozenset(restrict_to)
        tiny &= keep
        atyp &= keep
    return SandwichSets(tiny=tiny, atyp=atyp, p0=p0, p1=p1,
                        delta_t=delta_t, delta_a=delta_a)


@dataclass
class ScatterReport:
    """Pass/fail of the tiny/atyp scatter properties with violating witnesses."""

    k: int
    L: int
    delta: float
    tiny_neighborhood_ok: bool = True
    atyp_neighborhood_ok: bool = True
    tiny_cycle_ok: bool = True
    # witnesses: (vertex, offending set) resp. cycle vertex tuple
    tiny_neighborhood_witness: tuple[int, tuple[int, ...]] | None = None
    atyp_neighborhood_witness: tuple[int, tuple[int, ...]] | None = None
    tiny_cycle_witness: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.tiny_neighborhood_ok and self.atyp_neighborhood_ok and self.tiny_cycle_ok

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "L": self.L,
            "delta": self.delta,
            "tiny_neighborhood_ok": self.tiny_neighborhood_ok,
            "atyp_neighborhood_ok": self.atyp_neighborhood_ok,
            "tiny_cycle_ok": self.tiny_cycle_ok,
            "tiny_neighborhood_witness": self.tiny_neighborhood_witness,
            "atyp_neighborhood_witness": self.atyp_neighborhood_witness,
            "tiny_cycle_witness": self.tiny_cycle_witness,
        }


def _short_cycles_through(g: Graph, start: int, max_len: int) -> Iterable[tuple[int, ...]]:
    """Cycles of length <= max_len through ``start``, via bounded DFS.

    Cycles may be reported more than once (both orientations); duplicates
    are harmless for violation checking."""
    path = [start]
    on_path = {start}

    def dfs(v: int):
        for u in sorted(g.neighbors(v)):
            if u == start and len(path) >= 3:
                yield tuple(path)
            elif u not in on_path and len(path) < max_len:
                path.append(u)
                on_path.add(u)
                yield from dfs(u)
                on_path.discard(u)
                path.pop()

    yield from dfs(start)


def check_scatter(g_minus: Graph, g_plus: Graph, delta: float, k: int, L: int,
                  p0: float | None = None, p1: float | None = None) -> ScatterReport:
    """Evaluate the scatter properties on (G^-, G^+):

    (i)  every N^3(v) in G^+ holds <= k-1 tiny vertices,
    (ii) every N^3(v) in G^+ holds <= L atypical vertices,
    (iii) every cycle of <= 2k vertices in G^+ holds <= k-2 tiny vertices.

    Tiny/atyp are the union over (G^-, p0) and (G^+, p1); densities are
    used when p0/p1 are not given.
    """
    if p0 is None:
        p0 = density(g_minus)
    if p1 is None:
        p1 = density(g_plus)
    sets = classify_sandwich(g_minus, g_plus, p0, p1, delta, delta)
    report = ScatterReport(k=k, L=L, delta=delta)
    for v in g_plus.active:
        n3 = neighborhood_within(g_plus, v, 3)
        bad_t = n3 & sets.tiny
        if len(bad_t) > k - 1 and report.tiny_neighborhood_ok:
            report.tiny_neighborhood_ok = False
            report.tiny_neighborhood_witness = (v, tuple(sorted(bad_t)))
        bad_a = n3 & sets.atyp
        if len(bad_a) > L and report.atyp_neighborhood_ok:
            report.atyp_neighborhood_ok = False
            report.atyp_neighborhood_witness = (v, tuple(sorted(bad_a)))
    # (iii): only cycles containing a tiny vertex can violate, so DFS from
    # tiny vertices suffices; cap 2k is small (k = 3 in the application).
    for v in sorted(sets.tiny):
        for cyc in _short_cycles_through(g_plus, v, 2 * k):
            if len(set(cyc) & sets.tiny) > k - 2:
                report.tiny_cycle_ok = False
                report.tiny_cycle_witness = cyc
                break
        if not report.tiny_cycle_ok:
            break
    return report


@dataclass(frozen=True)
class EdgeDistributionReport:
    """Max of |e(X,Y) - |X||Y|p| / sqrt(|X||Y|np) over a witness family.

    The quantified statement ranges over all 4^n set pairs and cannot be
    checked exhaustively; the family here is documented and configurable:
    (a) X = Y = V, (b) every ({v}, V), (c) random pairs, (d) prefixes of
    the degree-sorted vertex order paired with each other.
    """

    c: float
    max_ratio: float
    worst_pair: tuple[tuple[int, ...], tuple[int, ...]]
    ok: bool


def check_edge_distribution(g: Graph, p: float, c: float = 3.0,
                            samples: int = 200, seed: int = 0) -> EdgeDistributionReport:
    n = g.n_active
    verts = sorted(g.active)
    if n == 0 or p <= 0:
        return EdgeDistributionReport(c=c, max_ratio=0.0, worst_pair=((), ()), ok=True)
    rng = rng_from_seed(seed)

    best = (-1.0, ((), ()))

    def consider(x: list[int], y: list[int]):
        nonlocal best
        if not x or not y:
            return
        e = edge_count_between(g, x, y)
        ratio = abs(e - len(x) * len(y) * p) / math.sqrt(len(x) * len(y) * n * p)
        if ratio > best[0]:
            best = (ratio, (tuple(x), tuple(y)))

    consider(verts, verts)
    for v in verts:
        consider([v], verts)
    by_degree = sorted(verts, key=lambda v: (-g.degree(v), v))
    for frac in (0.01, 0.05, 0.1, 0.25, 0.5):
        t = max(1, int(frac * n))
        consider(by_degree[:t], by_degree[:t])
        consider(by_degree[:t], by_degree[t:])
    sizes = [max(1, int(f * n)) for f in (0.02, 0.1, 0.3)]
    for _ in range(samples):
        sx = sizes[int(rng.integers(0, len(sizes)))]
        sy = sizes[int(rng.integers(0, len(sizes)))]
        x = [verts[i] for i in rng.choice(n, size=min(sx, n), replace=False)]
        y = [verts[i] for i in rng.choice(n, size=min(sy, n), replace=False)]
        consider(x, y)
    ratio, pair = best
    return EdgeDistributionReport(c=c, max_ratio=ratio, worst_pair=pair, ok=ratio <= c)


def check_codegree(g: Graph) -> tuple[bool, tuple[int, int] | None]:
    """True iff every two distinct vertices share at most two neighbours."""
    for w in g.active:
        nbrs = sorted(g.neighbors(w))
        # count pair frequencies through shared neighbour w is quadratic in
        # degree; direct pairwise check over 2-neighbourhoods instead
        for i, u in enumerate(nbrs):
            for v in nbrs[i + 1:]:
                if len(g.neighbors(u) & g.neighbors(v)) > 2:
                    return False, (u, v)
    return True, None


def degenerate_set(g: Graph, a: Iterable[int], b: Iterable[int],
                   p1: float, eps: float) -> frozenset[int]:
    """Vertices of A u B with degree into A below (1/2 + eps/7)|A|p1 or
    into B below (1/2 + eps/7)|B|p1."""
    aset, bset = frozenset(a), frozenset(b)
    if aset & bset:
        raise ValueError("a and b must be disjoint")
    thr_a = (0.5 + eps / 7.0) * len(aset) * p1
    thr_b = (0.5 + eps / 7.0) * len(bset) * p1
    out = set()
    for v in aset | bset:
        if len(g.neighbors(v) & aset) < thr_a or len(g.neighbors(v) & bset) < thr_b:
            out.add(v)
    return frozenset(out)


def cherry_count(g: Graph) -> int:
    """Unordered pairs of degree-1 vertices sharing their unique neighbour."""
    total = 0
    for w in g.active:
        leaves = sum(1 for u in g.neighbors(w) if g.degree(u) == 1)
        total += leaves * (leaves - 1) // 2
    return total


def find_cherry(g: Graph) -> tuple[int, int, int] | None:
    """Some (leaf, leaf, common neighbour) triple, or None."""
    for w in g.active:
        leaves = [u for u in sorted(g.neighbors(w)) if g.degree(u) == 1]
        if len(leaves) >= 2:
            return (leaves[0], leaves[1], w)
    return None


def scatter_report_to_json_str(report: ScatterReport) -> str:
    return json.dumps(report.to_json(), indent=2)
