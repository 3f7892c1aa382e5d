"""Evaluation of parsed queries over a TripleStore."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Context, Decimal, DivisionByZero, InvalidOperation
from typing import Iterable, Sequence, Union

from ..errors import EvaluationError, QueryTypeError
from ..kernels import reach_many
from ..ldgraph import LinkedDocument, Literal, Triple, Value
from .ast import (
    Aggregate,
    BinOp,
    Const,
    Expression,
    IfExpr,
    Iri,
    PathAlt,
    PathExpr,
    PathPred,
    PathSeq,
    PathStar,
    QueryAst,
    TriplePattern,
    UnaryOp,
    Var,
    VarRef,
    aggregates_in,
    expr_vars,
)
from .store import TripleStore

DECIMAL_CONTEXT = Context(prec=12, rounding=ROUND_HALF_EVEN, traps=[DivisionByZero, InvalidOperation])

Row = dict  # variable name -> term id (int) or computed Value
Graph = Union[TripleStore, LinkedDocument, Iterable[Triple]]


class _ExprError(Exception):
    """A SPARQL expression error: FILTER treats it as false, BIND leaves the variable unbound."""


@dataclass(frozen=True)
class SolutionTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[Value | None, ...], ...]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[Value | None]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def as_dicts(self) -> list[dict[str, Value | None]]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def canonical(value: Value | None) -> str:
    if value is None:
        return ""
    if isinstance(value, Literal):
        return value.lexical
    return value


def as_store(graph: Graph) -> TripleStore:
    if isinstance(graph, TripleStore):
        return graph
    if isinstance(graph, LinkedDocument):
        return TripleStore.from_document(graph)
    return TripleStore(graph)


# ---------------------------------------------------------------------------
# property paths


def _pred_set(path: PathExpr) -> list[str] | None:
    """Predicates of a path that is a plain predicate or an alternation of them."""
    if isinstance(path, PathPred):
        return [path.iri]
    if isinstance(path, PathAlt):
        out = []
        for item in path.items:
            sub = _pred_set(item)
            if sub is None:
                return None
            out += sub
        return out
    return None


class _PathEval:
    def __init__(self, store: TripleStore) -> None:
        self.store = store

    def step(self, path: PathExpr, starts: Iterable[int], inverse: bool = False) -> dict[int, set[int]]:
        starts = list(dict.fromkeys(starts))
        store = self.store
        if isinstance(path, PathPred):
            pid = store.id(path.iri)
            index = (store.op if inverse else store.sp).get(pid, {}) if pid is not None else {}
            return {s: set(index.get(s, ())) for s in starts}
        if isinstance(path, PathAlt):
            out: dict[int, set[int]] = {s: set() for s in starts}
            for item in path.items:
                for s, ends in self.step(item, starts, inverse).items():
                    out[s] |= ends
            return out
        if isinstance(path, PathSeq):
            items = reversed(path.items) if inverse else path.items
            current = {s: {s} for s in starts}
            for item in items:
                mids = {m for ends in current.values() for m in ends}
                hop = self.step(item, mids, inverse)
                current = {s: set().union(*(hop[m] for m in ends)) if ends else set() for s, ends in current.items()}
            return current
        if isinstance(path, PathStar):
            return self.closure(path.item, starts, inverse)
        raise TypeError(f"not a path: {path!r}")

    def closure(self, inner: PathExpr, starts: list[int], inverse: bool) -> dict[int, set[int]]:
        store = self.store
        preds = _pred_set(inner)
        if preds is not None:
            pids = frozenset(i for i in (store.id(p) for p in preds) if i is not None)
            indptr, indices = store.csr(pids, inverse)
            offsets, nodes = reach_many(indptr, indices, starts, store.n_terms)
            flat = nodes.tolist()
            return {s: set(flat[offsets[k]:offsets[k + 1]]) for k, s in enumerate(starts)}
        out = {}
        for s in starts:
            seen = {s}
            frontier = {s}
            while frontier:
                hop = self.step(inner, frontier, inverse)
                frontier = {v for ends in hop.values() for v in ends} - seen
                seen |= frontier
            out[s] = seen
        return out


def eval_path(graph: Graph, start: str, path: PathExpr) -> set[Value]:
    """Nodes reachable from ``start`` along ``path``; zero-length steps include ``start``."""
    store = as_store(graph)
    sid = store.id(start)
    if sid is None:
        # an unknown node has no edges; only zero-length paths reach anything
        return {start} if _nullable(path) else set()
    ends = _PathEval(store).step(path, [sid])[sid]
    return {store.terms[i] for i in ends}


def _nullable(path: PathExpr) -> bool:
    if isinstance(path, PathStar):
        return True
    if isinstance(path, PathSeq):
        return all(_nullable(p) for p in path.items)
    if isinstance(path, PathAlt):
        return any(_nullable(p) for p in path.items)
    return False


# ---------------------------------------------------------------------------
# expressions


def _numeric(value: Value) -> int | Decimal | None:
    if isinstance(value, Literal):
        if value.datatype == "integer":
            return int(value.lexical)
        if value.datatype == "decimal":
            return Decimal(value.lexical)
    return None


def _literal_of_number(x: int | Decimal) -> Literal:
    if isinstance(x, int):
        return Literal(str(x), "integer")
    return Literal(str(x), "decimal")


def _ebv(value: Value) -> bool:
    if isinstance(value, Literal):
        if value.datatype == "boolean":
            return value.lexical == "true"
        num = _numeric(value)
        if num is not None:
            return num != 0
        if value.datatype == "string":
            return value.lexical != ""
    raise _ExprError("no effective boolean value")


def _compare(op: str, a: Value, b: Value) -> bool:
    na, nb = _numeric(a), _numeric(b)
    if na is not None and nb is not None:
        x, y = na, nb
    elif isinstance(a, Literal) and isinstance(b, Literal) and a.datatype == b.datatype:
        x, y = a.to_python(), b.to_python()
    elif op == "=":
        return a == b
    elif op == "!=":
        return a != b
    else:
        raise _ExprError(f"cannot order {a!r} and {b!r}")
    if isinstance(x, bool) != isinstance(y, bool):
        raise _ExprError("boolean compared with non-boolean")
    if op == "=":
        return x == y
    if op == "!=":
        return x != y
    if isinstance(a, str) and not isinstance(a, Literal):
        raise _ExprError("IRIs have no order")
    return {"<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op]


def _arith(op: str, a: Value, b: Value, row: Row | None) -> Literal:
    x, y = _numeric(a), _numeric(b)
    if x is None or y is None:
        bad = a if x is None else b
        raise QueryTypeError(f"arithmetic {op!r} on non-numeric value {canonical(bad)!r}", row)
    try:
        if op == "/":
            if y == 0:
                raise _ExprError("division by zero")
            return _literal_of_number(DECIMAL_CONTEXT.divide(Decimal(x), Decimal(y)))
        if isinstance(x, int) and isinstance(y, int):
            return _literal_of_number({"+": x + y, "-": x - y, "*": x * y}[op])
        dx, dy = Decimal(x), Decimal(y)
        fn = {"+": DECIMAL_CONTEXT.add, "-": DECIMAL_CONTEXT.subtract, "*": DECIMAL_CONTEXT.multiply}[op]
        return _literal_of_number(fn(dx, dy))
    except (DivisionByZero, InvalidOperation) as exc:
        raise _ExprError(str(exc)) from None


class _Exprs:
    def __init__(self, store: TripleStore) -> None:
        self.store = store

    def value(self, v: int | Value) -> Value:
        return self.store.terms[v] if isinstance(v, int) else v

    def eval(self, expr: Expression, row: Row, aggs: dict[Aggregate, Value | None] | None = None) -> Value:
        if isinstance(expr, Const):
            return expr.value
        if isinstance(expr, VarRef):
            v = row.get(expr.name)
            if v is None:
                raise _ExprError(f"?{expr.name} is unbound")
            return self.value(v)
        if isinstance(expr, Aggregate):
            if aggs is None:
                raise EvaluationError("aggregate outside a grouped projection", self.describe(row))
            result = aggs[expr]
            if result is None:
                raise _ExprError("aggregate error")
            return result
        if isinstance(expr, UnaryOp):
            if expr.op == "!":
                return Literal("false" if _ebv(self.eval(expr.operand, row, aggs)) else "true", "boolean")
            val = self.eval(expr.operand, row, aggs)
            num = _numeric(val)
            if num is None:
                raise QueryTypeError(f"unary {expr.op!r} on non-numeric value {canonical(val)!r}", self.describe(row))
            return _literal_of_number(-num if expr.op == "-" else num)
        if isinstance(expr, IfExpr):
            cond = self.eval(expr.cond, row, aggs)
            if not (isinstance(cond, Literal) and cond.datatype == "boolean"):
                raise _ExprError("IF condition is not a boolean")
            return self.eval(expr.then if cond.lexical == "true" else expr.other, row, aggs)
        if isinstance(expr, BinOp):
            op = expr.op
            if op in ("&&", "||"):
                return self._logical(op, expr, row, aggs)
            a = self.eval(expr.left, row, aggs)
            b = self.eval(expr.right, row, aggs)
            if op in ("=", "!=", "<", ">", "<=", ">="):
                return Literal("true" if _compare(op, a, b) else "false", "boolean")
            return _arith(op, a, b, self.describe(row))
        raise EvaluationError(f"unknown expression {expr!r}")

    def _logical(self, op: str, expr: BinOp, row: Row, aggs) -> Literal:
        results = []
        for side in (expr.left, expr.right):
            try:
                results.append(_ebv(self.eval(side, row, aggs)))
            except _ExprError:
                results.append(None)
        short = op == "||"
        if short in results:
            return Literal("true" if short else "false", "boolean")
        if None in results:
            raise _ExprError("logical operand error")
        return Literal("false" if short else "true", "boolean")

    def test(self, expr: Expression, row: Row) -> bool:
        try:
            return _ebv(self.eval(expr, row))
        except _ExprError:
            return False

    def describe(self, row: Row) -> dict[str, str]:
        return {k: canonical(self.value(v)) for k, v in row.items() if v is not None}


# ---------------------------------------------------------------------------
# basic graph patterns


def _const_id(store: TripleStore, term) -> int | None | bool:
    """Id of a constant term; False when it cannot match anything."""
    value = term.value if isinstance(term, Iri) else term
    i = store.id(value)
    return False if i is None else i


class _Component:
    def __init__(self) -> None:
        self.patterns: list[TriplePattern] = []
        self.filters: list[Expression] = []
        self.binds: list = []
        self.vars: set[str] = set()


class _Bgp:
    def __init__(self, store: TripleStore, exprs: _Exprs) -> None:
        self.store = store
        self.exprs = exprs
        self.paths = _PathEval(store)

    def cost(self, pat: TriplePattern, bound: set[str]) -> float:
        store = self.store

        def is_bound(t) -> bool:
            return not isinstance(t, Var) or t.name in bound

        sb, ob = is_bound(pat.subject), is_bound(pat.object)
        if isinstance(pat.path, Var):
            base = float(len(store)) * (2.0 if pat.path.name not in bound else 1.0)
        elif isinstance(pat.path, PathPred):
            pid = store.id(pat.path.iri)
            base = float(store.count(pid)) if pid is not None else 0.0
        else:
            base = float(len(store)) * 4
        if sb and ob:
            return 0.0
        if isinstance(pat.path, PathPred) and (sb or ob):
            pid = store.id(pat.path.iri)
            index = (store.sp if sb else store.op).get(pid, {})
            return base / max(1, len(index))
        if sb or ob:
            return base ** 0.5
        return base + 1.0

    def run(self, comp: _Component) -> list[Row]:
        rows: list[Row] = [{}]
        bound: set[str] = set()
        pending = list(comp.patterns)
        filters = list(comp.filters)
        bind_targets = {b.var for b in comp.binds}
        while pending and rows:
            connected = [p for p in pending if p.variables() & bound] if bound else pending
            pat = min(connected or pending, key=lambda p: self.cost(p, bound))
            pending.remove(pat)
            rows = self.join(rows, pat)
            bound |= pat.variables()
            ready = [f for f in filters if expr_vars(f) <= bound and not expr_vars(f) & bind_targets]
            for f in ready:
                filters.remove(f)
                rows = [r for r in rows if self.exprs.test(f, r)]
        for b in comp.binds:
            for r in rows:
                try:
                    r[b.var] = self.exprs.eval(b.expr, r)
                except _ExprError:
                    r[b.var] = None
        for f in filters:
            rows = [r for r in rows if self.exprs.test(f, r)]
        return rows

    def join(self, rows: list[Row], pat: TriplePattern) -> list[Row]:
        store = self.store
        s_term, o_term = pat.subject, pat.object
        s_var = s_term.name if isinstance(s_term, Var) else None
        o_var = o_term.name if isinstance(o_term, Var) else None
        s_const = None if s_var else _const_id(store, s_term)
        o_const = None if o_var else _const_id(store, o_term)
        if isinstance(pat.path, Var):
            return self._join_var_pred(rows, pat.path.name, s_var, s_const, o_var, o_const)
        if isinstance(pat.path, PathPred):
            pid = store.id(pat.path.iri)
            sp = store.sp.get(pid, {}) if pid is not None else {}
            op = store.op.get(pid, {}) if pid is not None else {}
            out = []
            for r in rows:
                s = r.get(s_var) if s_var else s_const
                o = r.get(o_var) if o_var else o_const
                if s is False or o is False:
                    continue
                if s is not None and not isinstance(s, int):
                    s = store.id(s)
                    if s is None:
                        continue
                if o is not None and not isinstance(o, int):
                    o = store.id(o)
                    if o is None:
                        continue
                if s is not None and o is not None:
                    if pid is not None and (s, pid, o) in store.triple_set:
                        out.append(r)
                elif s is not None:
                    for obj in sp.get(s, ()):
                        out.append({**r, o_var: obj})
                elif o is not None:
                    for subj in op.get(o, ()):
                        out.append({**r, s_var: subj})
                else:
                    for subj, objs in sp.items():
                        for obj in objs:
                            if s_var == o_var and subj != obj:
                                continue
                            out.append({**r, s_var: subj, o_var: obj})
            return out
        return self._join_path(rows, pat.path, s_var, s_const, o_var, o_const)

    def _join_path(self, rows, path, s_var, s_const, o_var, o_const) -> list[Row]:
        store = self.store

        def resolve(r, var, const):
            v = r.get(var) if var else const
            if v is not None and v is not False and not isinstance(v, int):
                v = store.id(v)
                return False if v is None else v
            return v

        ends = [(resolve(r, s_var, s_const), resolve(r, o_var, o_const)) for r in rows]
        forward_starts = {s for s, o in ends if isinstance(s, int) and s is not False}
        inverse_starts = {o for s, o in ends if s is None and isinstance(o, int) and o is not False}
        any_free = any(s is None and o is None for s, o in ends)
        if any_free:
            forward_starts |= set(store.nodes)
        fwd = self.paths.step(path, sorted(forward_starts)) if forward_starts else {}
        inv = self.paths.step(path, sorted(inverse_starts), inverse=True) if inverse_starts else {}
        out = []
        for r, (s, o) in zip(rows, ends):
            if s is False or o is False:
                continue
            if isinstance(s, int) and not isinstance(s, bool):
                reach = fwd[s]
                if o is not None:
                    if o in reach:
                        out.append(r)
                else:
                    out.extend({**r, o_var: x} for x in sorted(reach))
            elif o is not None:
                out.extend({**r, s_var: x} for x in sorted(inv[o]))
            else:
                for start in store.nodes:
                    for x in sorted(fwd[start]):
                        if s_var == o_var and x != start:
                            continue
                        out.append({**r, s_var: start, o_var: x})
        return out

    def _join_var_pred(self, rows, p_var, s_var, s_const, o_var, o_const) -> list[Row]:
        store = self.store
        out = []
        for r in rows:
            s = r.get(s_var) if s_var else s_const
            o = r.get(o_var) if o_var else o_const
            p = r.get(p_var)
            if s is False or o is False:
                continue
            if s is not None:
                candidates = ((s, pp, oo) for pp, oo in store.by_subject.get(s, ()))
            else:
                candidates = ((ss, pp, oo) for pp, m in store.sp.items() for ss, objs in m.items() for oo in objs)
            for ss, pp, oo in candidates:
                if o is not None and oo != o:
                    continue
                if p is not None and pp != p:
                    continue
                new = dict(r)
                for name, val in ((s_var, ss), (p_var, pp), (o_var, oo)):
                    if name is None:
                        continue
                    if name in new and new[name] is not None and new[name] != val:
                        break
                    new[name] = val
                else:
                    out.append(new)
        return out


def _components(ast: QueryAst) -> list[_Component]:
    items: list[tuple[str, object, set[str]]] = []
    items += [("pattern", p, p.variables()) for p in ast.patterns]
    items += [("bind", b, expr_vars(b.expr) | {b.var}) for b in ast.binds]
    items += [("filter", f, expr_vars(f)) for f in ast.filters]
    parent = list(range(len(items)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[str, int] = {}
    for i, (_, _, vs) in enumerate(items):
        for v in vs:
            if v in owner:
                parent[find(i)] = find(owner[v])
            else:
                owner[v] = i
    comps: dict[int, _Component] = {}
    for i, (kind, item, vs) in enumerate(items):
        comp = comps.setdefault(find(i), _Component())
        comp.vars |= vs
        getattr(comp, kind + "s").append(item)
    return list(comps.values())


# ---------------------------------------------------------------------------
# grouping and projection


def _aggregate(agg: Aggregate, rows: Iterable[Row], exprs: _Exprs) -> Value | None:
    values: list[Value] = []
    n_rows = 0
    for r in rows:
        n_rows += 1
        if agg.arg is None:
            continue
        try:
            values.append(exprs.eval(agg.arg, r))
        except _ExprError:
            continue
    if agg.distinct:
        values = list(dict.fromkeys(values))
    if agg.name == "COUNT":
        return Literal(str(n_rows if agg.arg is None else len(values)), "integer")
    if agg.name == "SUM":
        total: int | Decimal = 0
        for v in values:
            num = _numeric(v)
            if num is None:
                raise QueryTypeError(f"SUM over non-numeric value {canonical(v)!r}")
            if isinstance(total, int) and isinstance(num, int):
                total += num
            else:
                total = DECIMAL_CONTEXT.add(Decimal(total), Decimal(num))
        return _literal_of_number(total)
    if agg.name == "GROUP_CONCAT":
        return Literal(agg.separator.join(sorted(canonical(v) for v in values)))
    raise EvaluationError(f"unknown aggregate {agg.name}")


def _product(parts: Sequence[list[Row]]) -> list[Row]:
    if len(parts) == 1:
        return parts[0]
    out = []
    for combo in itertools.product(*parts):
        merged: Row = {}
        for r in combo:
            merged.update(r)
        out.append(merged)
    return out


def evaluate(graph: Graph, ast: QueryAst) -> SolutionTable:
    """Evaluate ``ast``; the result is a pure function of (graph, ast)."""
    store = as_store(graph)
    exprs = _Exprs(store)
    bgp = _Bgp(store, exprs)
    comps = _components(ast)
    results = [bgp.run(c) for c in comps] or [[{}]]
    columns = tuple(ast.columns())
    if not ast.is_grouped:
        rows = _product(results)
        exprs_of = {p.var: p.expr for p in ast.projection if p.expr is not None}
        table = []
        for r in rows:
            values = []
            for c in columns:
                if c in exprs_of:
                    try:
                        values.append(exprs.eval(exprs_of[c], r))
                    except _ExprError:
                        values.append(None)
                else:
                    v = r.get(c)
                    values.append(exprs.value(v) if v is not None else None)
            table.append(tuple(values))
        table.sort(key=lambda t: tuple(canonical(v) for v in t))
        return SolutionTable(columns, tuple(table))
    groups = _grouped(ast, comps, results, exprs)
    out = []
    # factored groups share row lists; aggregate each (aggregate, row list) pair once
    shared: dict[tuple[Aggregate, int], Value | None] = {}
    for key, rows_of in groups:
        cache: dict[Aggregate, Value | None] = {}
        for agg in ast.aggregates:
            if agg not in cache:
                rows = rows_of(agg)
                try:
                    if (agg, id(rows)) not in shared:
                        shared[(agg, id(rows))] = _aggregate(agg, rows, exprs)
                    cache[agg] = shared[(agg, id(rows))]
                except QueryTypeError as exc:
                    raise QueryTypeError(str(exc), {k: canonical(v) for k, v in zip(ast.group_by, key)}) from None
        key_row = {v: k for v, k in zip(ast.group_by, key)}
        values = []
        for proj in ast.projection:
            if proj.expr is None:
                values.append(key_row.get(proj.var))
                continue
            try:
                values.append(exprs.eval(proj.expr, key_row, cache))
            except _ExprError:
                values.append(None)
        out.append((tuple(canonical(k) for k in key), tuple(values)))
    out.sort(key=lambda item: item[0])
    return SolutionTable(columns, tuple(v for _, v in out))


_UNIT: list[Row] = [{}]


def _grouped(ast: QueryAst, comps: list[_Component], results: list[list[Row]], exprs: _Exprs):
    """(group key values, aggregate -> rows) pairs.

    When every aggregate is DISTINCT and reads variables of a single
    component, row multiplicities cannot change any result, so the
    cross product between components is never materialised.
    """
    group_by = ast.group_by
    aggs = ast.aggregates
    owner = {}
    for i, c in enumerate(comps):
        for v in c.vars:
            owner[v] = i

    def agg_comp(agg: Aggregate) -> int | None:
        found = {owner[v] for v in expr_vars(agg) if v in owner}
        return found.pop() if len(found) == 1 else (None if not found else -1)

    factorable = len(results) > 1 and all(a.distinct for a in aggs) and all(agg_comp(a) != -1 for a in aggs)
    if not factorable:
        rows = _product(results)
        groups: dict[tuple, list[Row]] = {}
        for r in rows:
            key = tuple(r.get(v) for v in group_by)
            groups.setdefault(key, []).append(r)
        if not group_by and not groups:
            groups[()] = []
        for key, members in groups.items():
            yield tuple(exprs.value(k) if k is not None else None for k in key), (lambda _a, m=members: m)
        return

    keyed: list[dict[tuple, list[Row]]] = []
    comp_keys: list[list[str]] = []
    for c, rows in zip(comps, results):
        gv = [v for v in group_by if v in c.vars]
        comp_keys.append(gv)
        index: dict[tuple, list[Row]] = {}
        for r in rows:
            index.setdefault(tuple(r.get(v) for v in gv), []).append(r)
        keyed.append(index)
    if any(not idx for idx in keyed):
        if not group_by:
            yield (), (lambda _a: [])
        return
    for combo in itertools.product(*(sorted(idx, key=repr) for idx in keyed)):
        merged: dict[str, object] = {}
        for gv, part in zip(comp_keys, combo):
            merged.update(zip(gv, part))
        key = tuple(merged.get(v) for v in group_by)
        parts = {i: keyed[i][part] for i, part in enumerate(combo)}

        def rows_of(agg: Aggregate, parts=parts) -> list[Row]:
            i = agg_comp(agg)
            if i is None:
                return _UNIT
            return parts[i]

        yield tuple(exprs.value(k) if k is not None else None for k in key), rows_of
