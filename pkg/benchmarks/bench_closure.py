"""Compare the compiled and pure-Python reachability kernels.

Runs two workloads per backend: raw ``reach_many`` over a random graph and
the cookbook input-file query over a generated campaign graph. The query
workload runs each backend in a child process so ``FAIRPROV_PURE`` takes
effect at import.

    python benchmarks/bench_closure.py [--nodes N] [--profile demo|default]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import tempfile
import time

import numpy as np

from fairprov import _kernels_py, kernels

try:
    from fairprov import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

_QUERY_CHILD = """
import json, sys, time
from fairprov import kernels
from fairprov.ldgraph import parse
from fairprov.query import bundled_query, query
doc = parse(open(sys.argv[1], "rb").read())
best = float("inf")
for _ in range(int(sys.argv[2])):
    t0 = time.perf_counter()
    table = query(doc, bundled_query("input_files"))
    best = min(best, time.perf_counter() - t0)
print(json.dumps({"backend": kernels.BACKEND, "seconds": best, "rows": len(table)}))
"""


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernel(n_nodes: int, degree: int, n_starts: int, repeat: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    src = rng.integers(0, n_nodes, n_nodes * degree)
    dst = rng.integers(0, n_nodes, n_nodes * degree)
    indptr, indices = kernels.build_csr(n_nodes, src, dst)
    starts = rng.integers(0, n_nodes, n_starts)
    out = {"nodes": n_nodes, "edges": int(len(indices)), "starts": n_starts}
    ref = _kernels_py.reach_many(indptr, indices, starts, n_nodes)
    out["python_s"] = _best(lambda: _kernels_py.reach_many(indptr, indices, starts, n_nodes), repeat)
    if _kernels_c is not None:
        got = _kernels_c.reach_many(indptr, indices, starts, n_nodes)
        assert all(np.array_equal(a, b) for a, b in zip(ref, got)), "backends disagree"
        out["cython_s"] = _best(lambda: _kernels_c.reach_many(indptr, indices, starts, n_nodes), repeat)
        out["speedup"] = out["python_s"] / out["cython_s"]
    return out


def bench_query(profile: str, repeat: int) -> list[dict]:
    from fairprov import harness, ldgraph
    from fairprov.consolidate import consolidate_tree

    with tempfile.TemporaryDirectory() as tmp:
        root = os.path.join(tmp, "ds")
        harness.generate(getattr(harness, f"{profile}_profile")(), root, workers=4)
        doc, _ = consolidate_tree(root, workers=4)
        graph = os.path.join(tmp, "provenance.jsonld")
        with open(graph, "wb") as fh:
            fh.write(ldgraph.serialize(doc))
        results = []
        for pure in ("1", "0"):
            env = dict(os.environ, FAIRPROV_PURE=pure)
            proc = subprocess.run(
                [sys.executable, "-c", _QUERY_CHILD, graph, str(repeat)],
                env=env, capture_output=True, text=True, check=True,
            )
            results.append(json.loads(proc.stdout))
        return results


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=20000)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--starts", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--profile", choices=("demo", "default"), default="default")
    ap.add_argument("--skip-query", action="store_true")
    args = ap.parse_args()

    k = bench_kernel(args.nodes, args.degree, args.starts, args.repeat, args.seed)
    print(f"reach_many: {k['nodes']} nodes, {k['edges']} edges, {k['starts']} starts")
    print(f"  python  {k['python_s'] * 1e3:10.1f} ms")
    if "cython_s" in k:
        print(f"  cython  {k['cython_s'] * 1e3:10.1f} ms   ({k['speedup']:.1f}x)")
    else:
        print("  cython  not built")
    if not args.skip_query:
        print(f"input_files query on the {args.profile} campaign graph")
        for r in bench_query(args.profile, args.repeat):
            print(f"  {r['backend']:<7} {r['seconds'] * 1e3:10.1f} ms   ({r['rows']} rows)")


if __name__ == "__main__":
    main()
