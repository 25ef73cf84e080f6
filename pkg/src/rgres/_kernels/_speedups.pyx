# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: subset DP for exact Hamiltonicity / longest paths
and the Posa rotation closure.  Semantics match ``_fallback`` exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.string cimport memcpy

cnp.import_array()


def ham_reach_table(adj):
    cdef int n = len(adj)
    if n == 0:
        return np.zeros(1, dtype=np.uint32)
    if n > 20:
        raise ValueError("subset DP capped at 20 vertices")
    cdef cnp.uint64_t[::1] adjv = np.ascontiguousarray(adj, dtype=np.uint64)
    cdef cnp.ndarray out = np.zeros(1 << n, dtype=np.uint32)
    cdef cnp.uint32_t[::1] reach = out
    cdef unsigned int size = 1 << n
    cdef unsigned int mask, r, vbit, ext, ubit
    cdef int v
    reach[1] = 1
    for mask in range(1, size):
        r = reach[mask]
        while r:
            vbit = r & (-r)
            r ^= vbit
            v = 0
            while not (vbit >> v) & 1:
                v += 1
            ext = (<unsigned int> adjv[v]) & (~mask)
            while ext:
                ubit = ext & (-ext)
                ext ^= ubit
                reach[mask | ubit] |= ubit
    return out


def longest_path_order(adj):
    cdef int n = len(adj)
    if n == 0:
        return 0
    if n > 20:
        raise ValueError("subset DP capped at 20 vertices")
    cdef cnp.uint64_t[::1] adjv = np.ascontiguousarray(adj, dtype=np.uint64)
    cdef cnp.uint32_t[::1] reach = np.zeros(1 << n, dtype=np.uint32)
    cdef unsigned int size = 1 << n
    cdef unsigned int mask, r, vbit, ext, ubit, t
    cdef int v, best = 1, pc
    for v in range(n):
        reach[1u << v] = 1u << v
    for mask in range(1, size):
        r = reach[mask]
        if r == 0:
            continue
        pc = 0
        t = mask
        while t:
            t &= t - 1
            pc += 1
        if pc > best:
            best = pc
        while r:
            vbit = r & (-r)
            r ^= vbit
            v = 0
            while not (vbit >> v) & 1:
                v += 1
            ext = (<unsigned int> adjv[v]) & (~mask)
            while ext:
                ubit = ext & (-ext)
                ext ^= ubit
                reach[mask | ubit] |= ubit
    return best


def rotation_closure(path, indptr, indices, allowed):
    cdef cnp.int32_t[::1] p0 = np.ascontiguousarray(path, dtype=np.int32)
    cdef cnp.int32_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef cnp.int32_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.uint8_t[::1] allow = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef int L = p0.shape[0]
    cdef int n = ip.shape[0] - 1

    # at most one state per distinct endpoint
    cdef int cap = L if L > 1 else 1
    cdef cnp.ndarray paths_arr = np.empty((cap, L), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] paths = paths_arr
    cdef cnp.ndarray pos_arr = np.empty((cap, n), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] pos = pos_arr
    cdef cnp.ndarray parents_arr = np.empty(cap, dtype=np.int32)
    cdef cnp.int32_t[::1] parents = parents_arr
    cdef cnp.ndarray pivots_arr = np.empty(cap, dtype=np.int32)
    cdef cnp.int32_t[::1] pivots = pivots_arr
    cdef cnp.uint8_t[::1] seen = np.zeros(n, dtype=np.uint8)

    cdef int i, s, e, u, j, t, new_end, nstates
    for i in range(n):
        pos[0, i] = -1
    for i in range(L):
        paths[0, i] = p0[i]
        pos[0, p0[i]] = i
    parents[0] = -1
    pivots[0] = -1
    seen[p0[0]] = 1
    nstates = 1
    s = 0
    while s < nstates:
        e = paths[s, 0]
        for t in range(ip[e], ip[e + 1]):
            u = idx[t]
            j = pos[s, u]
            if j < 2 or j >= L - 1:
                continue
            if not allow[u]:
                continue
            new_end = paths[s, j - 1]
            if seen[new_end]:
                continue
            if not allow[new_end]:
                continue
            if j + 1 < L and not allow[paths[s, j + 1]]:
                continue
            # new path: reversed prefix [j-1 .. 0] then suffix [j .. L-1]
            for i in range(j):
                paths[nstates, i] = paths[s, j - 1 - i]
            memcpy(&paths[nstates, j], &paths[s, j], (L - j) * sizeof(cnp.int32_t))
            memcpy(&pos[nstates, 0], &pos[s, 0], n * sizeof(cnp.int32_t))
            for i in range(j):
                pos[nstates, paths[nstates, i]] = i
            parents[nstates] = s
            pivots[nstates] = u
            seen[new_end] = 1
            nstates += 1
        s += 1
    return (paths_arr[:nstates].copy(), parents_arr[:nstates].copy(),
            pivots_arr[:nstates].copy())
