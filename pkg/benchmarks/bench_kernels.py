"""Timing comparison of the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is timed
on identical inputs; results print as a small table with the speedup.
"""

import time

import numpy as np

from rgres._kernels import _fallback
from rgres.graph import Graph
from rgres.hamilton import PathState, _bitmask_adj, extend

try:
    from rgres._kernels import _speedups
except ImportError:
    _speedups = None


def _random_graph(rng, n, p):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.random() < p]
    return Graph.from_edges(n, edges)


def _time(fn, args_list, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_reach_table(rng):
    inputs = []
    for _ in range(20):
        g = _random_graph(rng, 16, 0.4)
        _, adj = _bitmask_adj(g)
        inputs.append((adj,))
    return "ham_reach_table (n=16, 20 graphs)", inputs


def bench_longest_path(rng):
    inputs = []
    for _ in range(20):
        g = _random_graph(rng, 15, 0.3)
        _, adj = _bitmask_adj(g)
        inputs.append((adj,))
    return "longest_path_order (n=15, 20 graphs)", inputs


def bench_rotation_closure(rng):
    inputs = []
    while len(inputs) < 50:
        g = _random_graph(rng, 200, 0.04)
        verts = sorted(g.active)
        p = PathState(seq=(verts[int(rng.integers(len(verts)))],))
        while (nxt := extend(p, g)) is not None:
            p = nxt
        if len(p) < 20:
            continue
        indptr, indices = g.csr()
        allowed = np.ones(g.n, dtype=np.uint8)
        inputs.append((np.asarray(p.seq, dtype=np.int32), indptr, indices,
                       allowed))
    return "rotation_closure (n=200, 50 paths)", inputs


def main():
    rng = np.random.default_rng(42)
    benches = [bench_reach_table(rng), bench_longest_path(rng),
               bench_rotation_closure(rng)]
    kernels = ["ham_reach_table", "longest_path_order", "rotation_closure"]
    print(f"{'benchmark':<42} {'python':>10} {'cython':>10} {'speedup':>8}")
    for (label, inputs), name in zip(benches, kernels):
        t_py = _time(getattr(_fallback, name), inputs)
        if _speedups is None:
            print(f"{label:<42} {t_py * 1e3:>8.1f}ms {'n/a':>10} {'n/a':>8}")
            continue
        t_cy = _time(getattr(_speedups, name), inputs)
        print(f"{label:<42} {t_py * 1e3:>8.1f}ms {t_cy * 1e3:>8.1f}ms "
              f"{t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
