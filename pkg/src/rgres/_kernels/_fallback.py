"""Pure-Python implementations of the hot kernels.

Used when the compiled extension is unavailable; semantics are identical
(tests compare the two backends directly).

Kernel contracts
----------------
``ham_reach_table(adj)``
    adj: uint64 array of adjacency bitmasks for n <= 20 vertices.
    Returns a uint32 array ``reach`` of size 2**n where ``reach[mask]`` is
    the bitmask of endpoints v such that some simple path starting at
    vertex 0 visits exactly ``mask`` and ends at v.  Vertex 0 must be in
    every mask with nonzero entry.

``longest_path_order(adj)``
    Number of vertices on a longest simple path (0 for the empty graph).

``rotation_closure(path, indptr, indices, allowed)``
    Posa rotation closure holding ``path[-1]`` fixed.  Admits a rotation
    with pivot u only when u and its path neighbours are all flagged in
    ``allowed``.  States are deduplicated by their free endpoint.
    Returns (paths, parents, pivots): ``paths`` is an S x L int32 matrix
    of derived paths (state 0 is the input path), ``parents[s]`` and
    ``pivots[s]`` record which state and pivot vertex produced state s
    (-1 for the root).
"""

from __future__ import annotations

import numpy as np


def ham_reach_table(adj: np.ndarray) -> np.ndarray:
    n = len(adj)
    if n == 0:
        return np.zeros(1, dtype=np.uint32)
    if n > 20:
        raise ValueError("subset DP capped at 20 vertices")
    size = 1 << n
    reach = np.zeros(size, dtype=np.uint32)
    reach[1] = 1  # path = [vertex 0]
    adj_list = [int(a) for a in adj]
    reach_l = reach.tolist()
    for mask in range(1, size):
        r = reach_l[mask]
        if not r:
            continue
        while r:
            vbit = r & -r
            r ^= vbit
            v = vbit.bit_length() - 1
            ext = adj_list[v] & ~mask
            while ext:
                ubit = ext & -ext
                ext ^= ubit
                reach_l[mask | ubit] |= ubit
    return np.asarray(reach_l, dtype=np.uint32)


def longest_path_order(adj: np.ndarray) -> int:
    n = len(adj)
    if n == 0:
        return 0
    if n > 20:
        raise ValueError("subset DP capped at 20 vertices")
    size = 1 << n
    reach_l = [0] * size
    for v in range(n):
        reach_l[1 << v] = 1 << v
    adj_list = [int(a) for a in adj]
    best = 1
    for mask in range(1, size):
        r = reach_l[mask]
        if not r:
            continue
        pc = mask.bit_count()
        if pc > best:
            best = pc
        while r:
            vbit = r & -r
            r ^= vbit
            v = vbit.bit_length() - 1
            ext = adj_list[v] & ~mask
            while ext:
                ubit = ext & -ext
                ext ^= ubit
                reach_l[mask | ubit] |= ubit
    return best


def rotation_closure(path: np.ndarray, indptr: np.ndarray, indices: np.ndarray,
                     allowed: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    L = len(path)
    n = len(indptr) - 1
    paths = [np.asarray(path, dtype=np.int32)]
    parents = [-1]
    pivots = [-1]
    seen = np.zeros(n, dtype=bool)
    seen[path[0]] = True
    pos = np.full(n, -1, dtype=np.int32)
    pos[path] = np.arange(L, dtype=np.int32)
    pos_stack = [pos]
    s = 0
    while s < len(paths):
        cur = paths[s]
        cur_pos = pos_stack[s]
        e = cur[0]
        for u in indices[indptr[e]:indptr[e + 1]]:
            j = cur_pos[u]
            # admissible pivots sit strictly between position 2 and the
            # fixed endpoint; j == L-1 is the cycle-closing chord, which
            # the caller handles
            if j < 2 or j >= L - 1:
                continue
            if not allowed[u]:
                continue
            new_end = cur[j - 1]
            if seen[new_end]:
                continue
            # pivot neighbours on the path must be allowed too
            if not allowed[new_end]:
                continue
            if j + 1 < L and not allowed[cur[j + 1]]:
                continue
            newp = cur.copy()
            newp[:j] = cur[j - 1::-1]
            npos = cur_pos.copy()
            npos[newp[:j]] = np.arange(j, dtype=np.int32)
            seen[new_end] = True
            paths.append(newp)
            pos_stack.append(npos)
            parents.append(s)
            pivots.append(int(u))
        s += 1
    return (np.stack(paths), np.asarray(parents, dtype=np.int32),
            np.asarray(pivots, dtype=np.int32))
