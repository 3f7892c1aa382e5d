"""Syntax tree of the supported SELECT subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..ldgraph import Literal
from ..vocab import PrefixTable


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True)
class Iri:
    value: str

    def __str__(self) -> str:
        return f"<{self.value}>"


Term = Union[Var, Iri, Literal]


# property paths


@dataclass(frozen=True)
class PathPred:
    iri: str


@dataclass(frozen=True)
class PathSeq:
    items: tuple["PathExpr", ...]

    def __post_init__(self) -> None:
        if len(self.items) < 2:
            raise ValueError("sequence needs at least two members")


@dataclass(frozen=True)
class PathAlt:
    items: tuple["PathExpr", ...]

    def __post_init__(self) -> None:
        if len(self.items) < 2:
            raise ValueError("alternation needs at least two members")


@dataclass(frozen=True)
class PathStar:
    item: "PathExpr"


PathExpr = Union[PathPred, PathSeq, PathAlt, PathStar]


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    path: Union[PathExpr, Var]
    object: Term

    def variables(self) -> set[str]:
        out = {t.name for t in (self.subject, self.object) if isinstance(t, Var)}
        if isinstance(self.path, Var):
            out.add(self.path.name)
        return out


# expressions


@dataclass(frozen=True)
class Const:
    value: Union[Literal, str]  # str is an IRI


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: "Expression"


@dataclass(frozen=True)
class IfExpr:
    cond: "Expression"
    then: "Expression"
    other: "Expression"


@dataclass(frozen=True)
class Aggregate:
    name: str  # COUNT, SUM, GROUP_CONCAT
    arg: Union["Expression", None]  # None for COUNT(*)
    distinct: bool = False
    separator: str = " "


Expression = Union[Const, VarRef, BinOp, UnaryOp, IfExpr, Aggregate]


def expr_vars(expr: Expression) -> set[str]:
    if isinstance(expr, VarRef):
        return {expr.name}
    if isinstance(expr, BinOp):
        return expr_vars(expr.left) | expr_vars(expr.right)
    if isinstance(expr, UnaryOp):
        return expr_vars(expr.operand)
    if isinstance(expr, IfExpr):
        return expr_vars(expr.cond) | expr_vars(expr.then) | expr_vars(expr.other)
    if isinstance(expr, Aggregate):
        return expr_vars(expr.arg) if expr.arg is not None else set()
    return set()


def aggregates_in(expr: Expression) -> list[Aggregate]:
    if isinstance(expr, Aggregate):
        return [expr]
    if isinstance(expr, BinOp):
        return aggregates_in(expr.left) + aggregates_in(expr.right)
    if isinstance(expr, UnaryOp):
        return aggregates_in(expr.operand)
    if isinstance(expr, IfExpr):
        return aggregates_in(expr.cond) + aggregates_in(expr.then) + aggregates_in(expr.other)
    return []


def vars_outside_aggregates(expr: Expression) -> set[str]:
    if isinstance(expr, Aggregate):
        return set()
    if isinstance(expr, VarRef):
        return {expr.name}
    if isinstance(expr, BinOp):
        return vars_outside_aggregates(expr.left) | vars_outside_aggregates(expr.right)
    if isinstance(expr, UnaryOp):
        return vars_outside_aggregates(expr.operand)
    if isinstance(expr, IfExpr):
        return (
            vars_outside_aggregates(expr.cond)
            | vars_outside_aggregates(expr.then)
            | vars_outside_aggregates(expr.other)
        )
    return set()


@dataclass(frozen=True)
class Projection:
    var: str
    expr: Union[Expression, None] = None  # None: plain variable


@dataclass(frozen=True)
class Bind:
    expr: Expression
    var: str


@dataclass
class QueryAst:
    prefixes: PrefixTable
    projection: list[Projection]  # empty list means SELECT *
    patterns: list[TriplePattern] = field(default_factory=list)
    filters: list[Expression] = field(default_factory=list)
    binds: list[Bind] = field(default_factory=list)
    group_by: list[str] = field(default_factory=list)

    @property
    def aggregates(self) -> list[Aggregate]:
        return [a for p in self.projection if p.expr is not None for a in aggregates_in(p.expr)]

    @property
    def is_grouped(self) -> bool:
        return bool(self.group_by) or bool(self.aggregates)

    def pattern_vars(self) -> list[str]:
        seen: dict[str, None] = {}
        for p in self.patterns:
            for t in (p.subject, p.path, p.object):
                if isinstance(t, Var):
                    seen.setdefault(t.name)
        return list(seen)

    def columns(self) -> list[str]:
        if self.projection:
            return [p.var for p in self.projection]
        return self.pattern_vars() + [b.var for b in self.binds]
