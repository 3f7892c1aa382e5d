"""Read-only, term-interned triple store with per-predicate indexes."""

from __future__ import annotations

import threading
from collections import defaultdict
from typing import Iterable

import numpy as np

from ..kernels import build_csr
from ..ldgraph import LinkedDocument, Triple, Value


class TripleStore:
    """Triples over integer term ids.

    ``sp[p][s]`` lists the objects of ``(s, p, ?)`` and ``op[p][o]`` the
    subjects of ``(?, p, o)``. The store never changes after construction;
    the CSR caches are filled lazily under a lock so concurrent queries are safe.
    """

    def __init__(self, triples: Iterable[Triple]) -> None:
        self.terms: list[Value] = []
        self.ids: dict[Value, int] = {}
        sp: dict[int, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
        op: dict[int, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
        by_subject: dict[int, list[tuple[int, int]]] = defaultdict(list)
        seen: set[tuple[int, int, int]] = set()
        for s, p, o in triples:
            key = (self._intern(s), self._intern(p), self._intern(o))
            if key in seen:
                continue
            seen.add(key)
            si, pi, oi = key
            sp[pi][si].append(oi)
            op[pi][oi].append(si)
            by_subject[si].append((pi, oi))
        self.sp = {p: dict(m) for p, m in sp.items()}
        self.op = {p: dict(m) for p, m in op.items()}
        self.by_subject = dict(by_subject)
        self.triple_set = frozenset(seen)
        self.nodes = sorted({s for s, _, _ in seen} | {o for _, _, o in seen})
        self._csr: dict[tuple[frozenset[int], bool], tuple[np.ndarray, np.ndarray]] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_document(cls, doc: LinkedDocument) -> "TripleStore":
        return cls(doc.triples())

    def _intern(self, term: Value) -> int:
        i = self.ids.get(term)
        if i is None:
            i = self.ids[term] = len(self.terms)
            self.terms.append(term)
        return i

    def __len__(self) -> int:
        return len(self.triple_set)

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def id(self, term: Value) -> int | None:
        return self.ids.get(term)

    def count(self, pred: int) -> int:
        return sum(len(v) for v in self.sp.get(pred, {}).values())

    def csr(self, preds: frozenset[int], inverse: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency over the union of ``preds``, forward or inverted."""
        key = (preds, inverse)
        found = self._csr.get(key)
        if found is not None:
            return found
        src: list[int] = []
        dst: list[int] = []
        for p in preds:
            for s, objs in self.sp.get(p, {}).items():
                src.extend([s] * len(objs))
                dst.extend(objs)
        if inverse:
            src, dst = dst, src
        built = build_csr(self.n_terms, src, dst)
        with self._lock:
            self._csr.setdefault(key, built)
        return self._csr[key]
