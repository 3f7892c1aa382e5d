"""Pure-Python reachability kernel; reference twin of the compiled ``_kernels``."""

from __future__ import annotations

import numpy as np


def reach_many(indptr, indices, starts, n_nodes: int):
    """Reflexive-transitive closure from each start over a CSR adjacency.

    Returns ``(offsets, nodes)``: the reachable set of ``starts[i]`` is
    ``nodes[offsets[i]:offsets[i + 1]]`` in ascending order, start included.
    """
    indptr = np.asarray(indptr, dtype=np.int64).tolist()
    indices = np.asarray(indices, dtype=np.int64).tolist()
    starts = np.asarray(starts, dtype=np.int64).tolist()
    stamp = [-1] * n_nodes
    offsets = [0]
    out: list[int] = []
    for k, s in enumerate(starts):
        if not 0 <= s < n_nodes:
            raise IndexError(f"start node {s} out of range")
        stamp[s] = k
        frontier = [s]
        found = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for j in range(indptr[u], indptr[u + 1]):
                    v = indices[j]
                    if stamp[v] != k:
                        stamp[v] = k
                        nxt.append(v)
            found.extend(nxt)
            frontier = nxt
        found.sort()
        out.extend(found)
        offsets.append(len(out))
    return np.asarray(offsets, dtype=np.int64), np.asarray(out, dtype=np.int64)
