# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled reachability kernel; same contract as ``_kernels_py.reach_many``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def reach_many(indptr, indices, starts, Py_ssize_t n_nodes):
    cdef const cnp.int64_t[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const cnp.int64_t[:] st = np.ascontiguousarray(starts, dtype=np.int64)
    cdef Py_ssize_t n_starts = st.shape[0]
    cdef cnp.int64_t[:] stamp = np.full(n_nodes, -1, dtype=np.int64)
    cdef cnp.int64_t[:] queue = np.empty(max(n_nodes, 1), dtype=np.int64)
    offsets = np.empty(n_starts + 1, dtype=np.int64)
    cdef cnp.int64_t[:] off = offsets
    cdef Py_ssize_t cap = max(n_nodes, 16)
    out = np.empty(cap, dtype=np.int64)
    cdef cnp.int64_t[:] res = out
    cdef Py_ssize_t k, head, tail, j, total = 0
    cdef cnp.int64_t s, u, v
    off[0] = 0
    for k in range(n_starts):
        s = st[k]
        if s < 0 or s >= n_nodes:
            raise IndexError(f"start node {s} out of range")
        stamp[s] = k
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            for j in range(ip[u], ip[u + 1]):
                v = ix[j]
                if stamp[v] != k:
                    stamp[v] = k
                    queue[tail] = v
                    tail += 1
        if total + tail > cap:
            while total + tail > cap:
                cap *= 2
            out = np.resize(out, cap)
            res = out
        for j in range(tail):
            res[total + j] = queue[j]
        out[total:total + tail].sort()
        total += tail
        off[k + 1] = total
    return offsets, out[:total].copy()
