"""Immutable simple undirected graphs with dense integer vertex ids.

Vertices are ids ``0..n-1``.  Graphs obtained by peeling (2-core, isolated
removal) keep the full id space and carry a vertex mask instead of
renumbering, so classifications computed on one graph can be intersected
with any of its subgraphs.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple graph: no loops, no multi-edges, symmetric adjacency.

    All mutating operations return new graphs.  Instances are safe to share
    across threads once constructed.
    """

    __slots__ = ("n", "_adj", "_active", "m", "_csr")

    def __init__(self, n: int, adj: tuple[frozenset[int], ...], active: frozenset[int] | None):
        self.n = n
        self._adj = adj
        self._active = active
        self.m = sum(len(a) for a in adj) // 2
        self._csr: tuple[np.ndarray, np.ndarray] | None = None

    # -- construction ---------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "Graph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if v in adj[u]:
                raise ValueError(f"duplicate edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
        return cls(n, tuple(frozenset(a) for a in adj), None)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, tuple(frozenset() for _ in range(n)), None)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        verts = frozenset(range(n))
        return cls(n, tuple(verts - {v} for v in range(n)), None)

    # -- basic queries ---------------------------------------------------

    def is_active(self, v: int) -> bool:
        return self._active is None or v in self._active

    @property
    def active(self) -> frozenset[int]:
        return frozenset(range(self.n)) if self._active is None else self._active

    @property
    def n_active(self) -> int:
        return self.n if self._active is None else len(self._active)

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def min_degree(self) -> int:
        return min((len(self._adj[v]) for v in self.active), default=0)

    def max_degree(self) -> int:
        return max((len(self._adj[v]) for v in self.active), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edges(self) -> Iterator[Edge]:
        for u in sorted(self.active):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield (u, v)

    def edge_set(self) -> set[Edge]:
        return set(self.edges())

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in CSR form (indptr, indices), int32, masked vertices empty."""
        if self._csr is None:
            indptr = np.zeros(self.n + 1, dtype=np.int32)
            for v in range(self.n):
                indptr[v + 1] = indptr[v] + len(self._adj[v])
            indices = np.empty(indptr[-1], dtype=np.int32)
            for v in range(self.n):
                indices[indptr[v]:indptr[v + 1]] = sorted(self._adj[v])
            self._csr = (indptr, indices)
        return self._csr

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self._active == other._active and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((self.n, self._active, self._adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, active={self.n_active})"

    # -- derived graphs --------------------------------------------------

    def with_mask(self, keep: Iterable[int]) -> "Graph":
        """Restrict to the given vertices; adjacency outside is dropped."""
        keep_f = frozenset(keep)
        if not keep_f <= self.active:
            raise ValueError("mask must be a subset of the active vertices")
        adj = tuple(
            self._adj[v] & keep_f if v in keep_f else frozenset() for v in range(self.n)
        )
        return Graph(self.n, adj, keep_f)

    def subtract(self, h: "Graph") -> "Graph":
        if h.n != self.n:
            raise ValueError(f"vertex-set mismatch: {self.n} != {h.n}")
        adj = tuple(self._adj[v] - h._adj[v] for v in range(self.n))
        return Graph(self.n, adj, self._active)

    def subtract_edges(self, edges: Iterable[Edge]) -> "Graph":
        drop: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in edges:
            drop[u].add(v)
            drop[v].add(u)
        adj = tuple(self._adj[v] - drop[v] for v in range(self.n))
        return Graph(self.n, adj, self._active)

    def add_edges(self, edges: Iterable[Edge]) -> "Graph":
        extra: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if not (self.is_active(u) and self.is_active(v)):
                raise ValueError(f"edge ({u}, {v}) touches a masked vertex")
            extra[u].add(v)
            extra[v].add(u)
        adj = tuple(self._adj[v] | extra[v] for v in range(self.n))
        return Graph(self.n, adj, self._active)

    def union(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise ValueError(f"vertex-set mismatch: {self.n} != {other.n}")
        adj = tuple(self._adj[v] | other._adj[v] for v in range(self.n))
        return Graph(self.n, adj, self._active)


def neighborhood_within(g: Graph, v: int, ell: int) -> frozenset[int]:
    """All vertices at graph distance at most ``ell`` from ``v``, excluding ``v``."""
    if not (0 <= v < g.n):
        raise ValueError(f"vertex {v} out of range")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    seen = {v}
    frontier = [v]
    out: set[int] = set()
    for _ in range(ell):
        nxt = []
        for u in frontier:
            for w in g.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    out.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return frozenset(out)


def edge_count_between(g: Graph, x: Iterable[int], y: Iterable[int]) -> int:
    """e_G(X, Y): edges with one endpoint in X, the other in Y.

    Edges with both endpoints in the intersection are counted twice.
    """
    xs, ys = set(x), set(y)
    _check_range(g, xs)
    _check_range(g, ys)
    if len(xs) > len(ys):
        xs, ys = ys, xs
    return sum(len(g.neighbors(u) & ys) for u in xs)


def edge_count_within(g: Graph, x: Iterable[int]) -> int:
    """e_G(X): edges with both endpoints in X, each counted once."""
    xs = set(x)
    _check_range(g, xs)
    return sum(len(g.neighbors(u) & xs) for u in xs) // 2


def _check_range(g: Graph, vs: set[int]) -> None:
    for v in vs:
        if not (0 <= v < g.n):
            raise ValueError(f"vertex {v} out of range")


def greedy_2_independent_set(g: Graph, within: Iterable[int], target: int) -> frozenset[int]:
    """Greedy 2-independent set inside ``within``: independent, and no two
    members share a neighbour.

    Scans vertex ids in ascending order; taking v blocks N(v) and N^2(v).
    May return fewer than ``target`` vertices.
    """
    pool = sorted(set(within))
    _check_range(g, set(pool))
    chosen: list[int] = []
    blocked: set[int] = set()
    for v in pool:
        if len(chosen) >= target:
            break
        if v in blocked:
            continue
        chosen.append(v)
        blocked.add(v)
        for u in g.neighbors(v):
            blocked.add(u)
            blocked.update(g.neighbors(u))
    return frozenset(chosen)


# -- edge-list text format ----------------------------------------------
#
# First line: "n m".  Then m lines "u v" with 0-based ids.  On write the
# edges are sorted lexicographically with u < v; the parser tolerates
# unsorted input and rejects duplicates and loops.


def write_edge_list(g: Graph, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def read_edge_list(path: str) -> Graph:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError("expected header 'n m'")
        n, m = int(header[0]), int(header[1])
        edges = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            u, v = map(int, line.split())
            edges.append(_norm_edge(u, v))
    if len(edges) != m:
        raise ValueError(f"header promised {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def edges_to_lines(edges: Sequence[Edge]) -> str:
    return "\n".join(f"{u} {v}" for u, v in edges)
