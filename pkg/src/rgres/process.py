"""Random graph process, G(n,p) sampling, and the sandwich coupling.

All samplers are pure functions of (parameters, seed).  Per-trial streams
are derived from a 64-bit master seed with splitmix64 mixing
(:func:`derive_seed`), so trials replay identically regardless of
scheduling.  The underlying generator is numpy's PCG64, keyed directly by
the derived 64-bit seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Edge, Graph

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step; the documented seed-mixing primitive."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Deterministic per-trial seed: splitmix64 applied to master ^ mix(index)."""
    return splitmix64((master_seed & _MASK64) ^ splitmix64(index))


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & _MASK64))


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(u: int, v: int, n: int) -> int:
    """Rank of the pair (u, v), u < v, in lexicographic order."""
    if u > v:
        u, v = v, u
    return u * n - u * (u + 1) // 2 + (v - u - 1)


def pairs_from_indices(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised inverse of :func:`pair_index`."""
    starts = np.arange(n, dtype=np.int64) * n - np.arange(n, dtype=np.int64) * (np.arange(n, dtype=np.int64) + 1) // 2
    u = np.searchsorted(starts, idx, side="right") - 1
    v = idx - starts[u] + u + 1
    return u.astype(np.int64), v.astype(np.int64)


def _sample_distinct_pair_sequence(n: int, m_max: int, rng: np.random.Generator) -> np.ndarray:
    """Ordered sequence of m_max distinct pair indices, uniform among
    prefixes of a random permutation of all C(n,2) pairs.

    For sparse prefixes this rejection-samples (expected O(1) per edge);
    otherwise it runs a partial Fisher-Yates over the pair index space.
    Both regimes draw the same number of edges per step, so extending
    m_max with the same seed extends the sequence prefix-consistently
    within a regime.
    """
    total = num_pairs(n)
    if m_max > total:
        raise ValueError(f"m_max={m_max} exceeds C({n},2)={total}")
    if m_max == 0:
        return np.empty(0, dtype=np.int64)
    if m_max < 0.1 * total:
        seen: set[int] = set()
        out = np.empty(m_max, dtype=np.int64)
        k = 0
        while k < m_max:
            batch = rng.integers(0, total, size=max(64, 2 * (m_max - k)))
            for idx in batch:
                ii = int(idx)
                if ii not in seen:
                    seen.add(ii)
                    out[k] = ii
                    k += 1
                    if k == m_max:
                        break
        return out
    # dense regime: partial Fisher-Yates
    arr = np.arange(total, dtype=np.int64)
    out = np.empty(m_max, dtype=np.int64)
    for k in range(m_max):
        j = int(rng.integers(k, total))
        arr[k], arr[j] = arr[j], arr[k]
        out[k] = arr[k]
    return out


@dataclass(frozen=True)
class ProcessTrace:
    """A prefix of the random graph process: ordered distinct edges plus
    the minimum-degree milestones hit within the prefix."""

    n: int
    seed: int
    edges: tuple[Edge, ...]
    milestones: dict[int, int] = field(default_factory=dict)  # k -> m_k

    @property
    def m_max(self) -> int:
        return len(self.edges)

    def milestone(self, k: int) -> int | None:
        return self.milestones.get(k)


def sample_process(n: int, m_max: int, seed: int) -> ProcessTrace:
    """Sample a length-m_max prefix of the random graph process.

    Milestones m_k = min{m : delta(G_m) >= k} are recorded for k in
    {1, 2, 3} whenever they occur within the prefix.
    """
    if not (0 <= m_max <= num_pairs(n)):
        raise ValueError(f"m_max={m_max} outside [0, C({n},2)]")
    rng = rng_from_seed(seed)
    idx = _sample_distinct_pair_sequence(n, m_max, rng)
    us, vs = pairs_from_indices(idx, n)

    deg = np.zeros(max(n, 1), dtype=np.int64)
    # below[k] = number of vertices with degree < k
    below = {1: n, 2: n, 3: n}
    milestones: dict[int, int] = {}
    for k in (1, 2, 3):
        if below[k] == 0:  # vacuous for n = 0
            milestones[k] = 0
    edges: list[Edge] = []
    for step in range(m_max):
        u, v = int(us[step]), int(vs[step])
        edges.append((u, v) if u < v else (v, u))
        for w in (u, v):
            deg[w] += 1
            d = int(deg[w])
            if d <= 3:
                below[d] -= 1
        for k in (1, 2, 3):
            if k not in milestones and below[k] == 0:
                milestones[k] = step + 1
    return ProcessTrace(n=n, seed=seed, edges=tuple(edges), milestones=milestones)


def sample_process_until(n: int, k: int, seed: int, m_start: int | None = None) -> ProcessTrace:
    """Sample the process until minimum degree reaches k (doubling the
    prefix as needed; the prefix is extension-consistent for a fixed seed
    while the sparse sampling regime applies)."""
    total = num_pairs(n)
    m_max = m_start if m_start is not None else min(total, max(16, int(1.5 * n * np.log(max(n, 2)))))
    while True:
        trace = sample_process(n, m_max, seed)
        if trace.milestone(k) is not None:
            return trace
        if m_max >= total:
            return trace
        m_max = min(total, 2 * m_max)


def graph_at(trace: ProcessTrace, m: int) -> Graph:
    if not (0 <= m <= trace.m_max):
        raise ValueError(f"m={m} beyond trace prefix of length {trace.m_max}")
    return Graph.from_edges(trace.n, trace.edges[:m])


def sample_gnp(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each pair independently an edge with probability p.

    Sampled as m ~ Bin(C(n,2), p) followed by a uniform m-subset of the
    pairs, which has the same distribution.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must be in [0, 1]")
    rng = rng_from_seed(seed)
    total = num_pairs(n)
    m = int(rng.binomial(total, p)) if total > 0 else 0
    if m == 0:
        return Graph.empty(n)
    if m == total:
        return Graph.complete(n)
    if m < 0.5 * total:
        seen: set[int] = set()
        while len(seen) < m:
            batch = rng.integers(0, total, size=2 * (m - len(seen)) + 16)
            for idx in batch:
                seen.add(int(idx))
                if len(seen) == m:
                    break
        idx_arr = np.fromiter(seen, dtype=np.int64, count=m)
    else:
        idx_arr = rng.permutation(total)[:m]
    us, vs = pairs_from_indices(idx_arr, n)
    return Graph.from_edges(n, zip(us.tolist(), vs.tolist()))


@dataclass(frozen=True)
class SandwichCoupling:
    """G^- included in G^+ with a random insertion order on the new edges.

    slice(m) = G^- plus the first m - e(G^-) edges of insertion_order, so
    slices are nested and the slice at fixed m (conditioned on
    e(G^-) <= m <= e(G^+)) is a uniform m-edge graph.
    """

    g_minus: Graph
    g_plus: Graph
    insertion_order: tuple[Edge, ...]
    p0: float
    p_prime: float
    p1: float


def sample_sandwich(n: int, p0: float, p_prime: float, seed: int) -> SandwichCoupling:
    if not (0.0 <= p0 <= 1.0 and 0.0 <= p_prime <= 1.0):
        raise ValueError("probabilities must be in [0, 1]")
    rng = rng_from_seed(seed)
    g_minus = sample_gnp(n, p0, int(rng.integers(0, _MASK64, dtype=np.uint64)))
    g_extra = sample_gnp(n, p_prime, int(rng.integers(0, _MASK64, dtype=np.uint64)))
    g_plus = g_minus.union(g_extra)
    new_edges = sorted(g_plus.edge_set() - g_minus.edge_set())
    order = [new_edges[i] for i in rng.permutation(len(new_edges))]
    p1 = 1.0 - (1.0 - p0) * (1.0 - p_prime)
    return SandwichCoupling(
        g_minus=g_minus,
        g_plus=g_plus,
        insertion_order=tuple(order),
        p0=p0,
        p_prime=p_prime,
        p1=p1,
    )


class CouplingRangeError(ValueError):
    """Requested slice index lies outside [e(G^-), e(G^+)]; the caller's
    coupling failed and should resample with a fresh derived seed."""


def sandwich_slice(c: SandwichCoupling, m: int) -> Graph:
    lo, hi = c.g_minus.m, c.g_plus.m
    if not (lo <= m <= hi):
        raise CouplingRangeError(f"m={m} outside coupling range [{lo}, {hi}]")
    return c.g_minus.add_edges(c.insertion_order[: m - lo])


# -- trace dump format ---------------------------------------------------
#
# Header: "n m_max seed m1 m2" (absent milestones written as -1), then one
# "u v" pair per line in process order.


def write_trace(trace: ProcessTrace, path: str) -> None:
    m1 = trace.milestone(1)
    m2 = trace.milestone(2)
    with open(path, "w") as fh:
        fh.write(f"{trace.n} {trace.m_max} {trace.seed} "
                 f"{-1 if m1 is None else m1} {-1 if m2 is None else m2}\n")
        for u, v in trace.edges:
            fh.write(f"{u} {v}\n")


def read_trace(path: str) -> ProcessTrace:
    with open(path) as fh:
        n, m_max, seed, m1, m2 = map(int, fh.readline().split())
        edges = []
        for line in fh:
            line = line.strip()
            if line:
                u, v = map(int, line.split())
                edges.append((u, v) if u < v else (v, u))
    if len(edges) != m_max:
        raise ValueError(f"header promised {m_max} edges, found {len(edges)}")
    milestones = {}
    if m1 >= 0:
        milestones[1] = m1
    if m2 >= 0:
        milestones[2] = m2
    return ProcessTrace(n=n, seed=seed, edges=tuple(edges), milestones=milestones)
