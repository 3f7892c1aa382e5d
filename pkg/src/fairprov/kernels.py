"""Backend selection for the graph kernels.

The compiled extension is used when it was built; ``FAIRPROV_PURE=1``
forces the pure-Python twin.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("FAIRPROV_PURE") == "1":
    from ._kernels_py import reach_many

    BACKEND = "python"
else:
    try:
        from ._kernels import reach_many

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._kernels_py import reach_many

        BACKEND = "python"

__all__ = ["BACKEND", "build_csr", "reach_many"]


def build_csr(n_nodes: int, src, dst) -> tuple[np.ndarray, np.ndarray]:
    """CSR adjacency (indptr, indices) from parallel edge arrays, duplicates kept."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    order = np.lexsort((dst, src))
    indices = dst[order]
    counts = np.bincount(src, minlength=n_nodes)
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices
