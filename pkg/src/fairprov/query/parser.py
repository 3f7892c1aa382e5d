"""Tokenizer and recursive-descent parser for the SELECT subset.

Anything outside the subset is rejected with ``UnsupportedFeature`` naming
the construct, so a caller can tell "not supported here" apart from a typo.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import QuerySyntaxError, UnsupportedFeature
from ..ldgraph import Literal
from ..vocab import DEFAULT_TABLE, RDF_TYPE, PrefixTable
from .ast import (
    Aggregate,
    BinOp,
    Bind,
    Const,
    Expression,
    IfExpr,
    Iri,
    PathAlt,
    PathExpr,
    PathPred,
    PathSeq,
    PathStar,
    Projection,
    QueryAst,
    TriplePattern,
    UnaryOp,
    Var,
    VarRef,
    aggregates_in,
    expr_vars,
    vars_outside_aggregates,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<bnode>_:[\w\-.]*)
  | (?P<pname>(?:[A-Za-z][\w\-.]*)?:(?:[\w\-]+(?:[\w\-.]*[\w\-])?)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>&&|\|\||!=|<=|>=|\^\^|[{}()\[\].;,=<>!+\-*/|^?@])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}

# keywords that open a construct outside the subset
_UNSUPPORTED_CLAUSES = {
    "OPTIONAL": "OPTIONAL",
    "MINUS": "MINUS",
    "UNION": "UNION",
    "GRAPH": "GRAPH",
    "SERVICE": "SERVICE",
    "VALUES": "VALUES",
}
_UNSUPPORTED_MODIFIERS = {"ORDER": "ORDER BY", "LIMIT": "LIMIT", "OFFSET": "OFFSET", "HAVING": "HAVING", "VALUES": "VALUES"}
_QUERY_FORMS = {"CONSTRUCT", "ASK", "DESCRIBE", "INSERT", "DELETE", "LOAD", "CLEAR", "CREATE", "DROP", "WITH"}
_AGGREGATES = {"COUNT", "SUM", "GROUP_CONCAT"}
_OTHER_AGGREGATES = {"AVG", "MIN", "MAX", "SAMPLE"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def upper(self) -> str:
        return self.text.upper()


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.table: PrefixTable = DEFAULT_TABLE

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None) -> QuerySyntaxError:
        tok = tok or self.tok
        found = tok.text or "end of query"
        return QuerySyntaxError(f"{message}, found {found!r}", tok.line, tok.col)

    def at_kw(self, *words: str) -> bool:
        return self.tok.kind == "name" and self.tok.upper in words

    def at(self, *puncts: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text in puncts

    def expect(self, punct: str) -> Token:
        if not self.at(punct):
            raise self.error(f"expected {punct!r}")
        return self.next()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            raise self.error(f"expected {word}")
        return self.next()

    # -- query
    def parse(self) -> QueryAst:
        self.prologue()
        if self.tok.kind == "name" and self.tok.upper in _QUERY_FORMS:
            raise UnsupportedFeature(self.tok.upper)
        self.expect_kw("SELECT")
        if self.at_kw("DISTINCT", "REDUCED"):
            raise UnsupportedFeature(f"SELECT {self.tok.upper}")
        projection = self.select_clause()
        if self.at_kw("FROM"):
            raise UnsupportedFeature("FROM")
        if self.at_kw("WHERE"):
            self.next()
        ast = QueryAst(self.table, projection)
        self.group_pattern(ast)
        if self.at_kw("GROUP"):
            self.next()
            self.expect_kw("BY")
            if self.tok.kind != "var":
                if self.at("("):
                    raise UnsupportedFeature("GROUP BY expression")
                raise self.error("expected a variable after GROUP BY")
            while self.tok.kind == "var":
                ast.group_by.append(self.next().text[1:])
            if self.at("("):
                raise UnsupportedFeature("GROUP BY expression")
        if self.tok.kind == "name" and self.tok.upper in _UNSUPPORTED_MODIFIERS:
            raise UnsupportedFeature(_UNSUPPORTED_MODIFIERS[self.tok.upper])
        if self.tok.kind != "eof":
            raise self.error("expected end of query")
        _check(ast)
        return ast

    def prologue(self) -> None:
        while self.at_kw("PREFIX", "BASE"):
            if self.tok.upper == "BASE":
                raise UnsupportedFeature("BASE")
            self.next()
            tok = self.next()
            if tok.kind != "pname" or not tok.text.endswith(":"):
                raise self.error("expected a prefix name ending in ':'", tok)
            iri = self.next()
            if iri.kind != "iri":
                raise self.error("expected an IRI in angle brackets", iri)
            self.prefixes[tok.text[:-1]] = iri.text[1:-1]
        self.table = DEFAULT_TABLE.with_prefixes(self.prefixes)

    def select_clause(self) -> list[Projection]:
        if self.at("*"):
            self.next()
            return []
        out: list[Projection] = []
        while True:
            if self.tok.kind == "var":
                out.append(Projection(self.next().text[1:]))
            elif self.at("("):
                self.next()
                expr = self.expression()
                self.expect_kw("AS")
                var = self.var()
                self.expect(")")
                out.append(Projection(var, expr))
            elif self.tok.kind == "name" and self.tok.upper in _AGGREGATES | _OTHER_AGGREGATES and self.peek().text == "(":
                # bare "AGG(...) AS ?v" projection without the enclosing parentheses
                expr = self.primary()
                self.expect_kw("AS")
                out.append(Projection(self.var(), expr))
            else:
                break
        if not out:
            raise self.error("expected a projection")
        return out

    def var(self) -> str:
        if self.tok.kind != "var":
            raise self.error("expected a variable")
        return self.next().text[1:]

    # -- patterns
    def group_pattern(self, ast: QueryAst) -> None:
        self.expect("{")
        while not self.at("}"):
            tok = self.tok
            if tok.kind == "eof":
                raise self.error("unterminated group pattern")
            if tok.kind == "name" and tok.upper in _UNSUPPORTED_CLAUSES:
                raise UnsupportedFeature(_UNSUPPORTED_CLAUSES[tok.upper])
            if self.at("{"):
                self.nested_group()
            elif self.at_kw("FILTER"):
                self.next()
                if self.at_kw("EXISTS") or (self.at_kw("NOT") and self.peek().upper == "EXISTS"):
                    raise UnsupportedFeature("EXISTS")
                if self.at("("):
                    self.next()
                    expr = self.expression()
                    self.expect(")")
                else:
                    expr = self.primary()
                ast.filters.append(expr)
            elif self.at_kw("BIND"):
                self.next()
                self.expect("(")
                expr = self.expression()
                self.expect_kw("AS")
                var = self.var()
                self.expect(")")
                ast.binds.append(Bind(expr, var))
            else:
                self.triples(ast)
                if not self.at(".") and not self.at("}") and not self.at_kw("FILTER", "BIND"):
                    if self.tok.kind == "name" and self.tok.upper in _UNSUPPORTED_CLAUSES:
                        raise UnsupportedFeature(_UNSUPPORTED_CLAUSES[self.tok.upper])
                    raise self.error("expected '.' or '}' after triple pattern")
            while self.at("."):
                self.next()
        self.next()

    def nested_group(self) -> None:
        if self.peek().kind == "name" and self.peek().upper == "SELECT":
            raise UnsupportedFeature("subquery")
        depth, j = 0, self.i
        while True:
            t = self.tokens[j]
            if t.kind == "eof":
                raise self.error("unterminated group pattern", t)
            if t.kind == "punct" and t.text == "{":
                depth += 1
            elif t.kind == "punct" and t.text == "}":
                depth -= 1
                if depth == 0:
                    break
            j += 1
        after = self.tokens[j + 1]
        if after.kind == "name" and after.upper == "UNION":
            raise UnsupportedFeature("UNION")
        raise UnsupportedFeature("nested group pattern")

    def triples(self, ast: QueryAst) -> None:
        subject = self.term(subject=True)
        while True:
            verb: PathExpr | Var
            if self.tok.kind == "var":
                verb = Var(self.next().text[1:])
            else:
                verb = self.path()
            while True:
                obj = self.term(subject=False)
                ast.patterns.append(TriplePattern(subject, verb, obj))
                if not self.at(","):
                    break
                self.next()
            if not self.at(";"):
                break
            while self.at(";"):
                self.next()
            if self.at(".", "}") or self.at_kw("FILTER", "BIND"):
                break

    def term(self, *, subject: bool) -> Var | Iri | Literal:
        tok = self.tok
        if tok.kind == "var":
            self.next()
            return Var(tok.text[1:])
        if tok.kind in ("iri", "pname"):
            return Iri(self.iri())
        if self.at("[") or tok.kind == "bnode":
            raise UnsupportedFeature("blank node")
        if self.at("("):
            raise UnsupportedFeature("RDF collection")
        if subject:
            raise self.error("expected a subject (variable or IRI)")
        lit = self.literal()
        if lit is None:
            raise self.error("expected an object term")
        return lit

    def iri(self) -> str:
        tok = self.next()
        if tok.kind == "iri":
            return tok.text[1:-1]
        if tok.kind == "pname":
            prefix, _, local = tok.text.partition(":")
            if prefix == "_":
                raise UnsupportedFeature("blank node")
            if prefix not in self.table:
                raise QuerySyntaxError(f"undeclared prefix {prefix!r}", tok.line, tok.col)
            return self.table.entries[prefix] + local
        raise self.error("expected an IRI", tok)

    def literal(self) -> Literal | None:
        tok = self.tok
        if tok.kind == "string":
            self.next()
            text = _unescape(tok.text[1:-1])
            if self.at("@"):
                raise UnsupportedFeature("language-tagged literal")
            if self.at("^^"):
                self.next()
                dt = self.iri()
                for name in ("string", "integer", "decimal", "boolean", "dateTime"):
                    if dt == "http://www.w3.org/2001/XMLSchema#" + name:
                        try:
                            return Literal(text, name)
                        except ValueError as exc:
                            raise QuerySyntaxError(str(exc), tok.line, tok.col) from None
                raise UnsupportedFeature(f"datatype <{dt}>")
            return Literal(text)
        if tok.kind == "number":
            self.next()
            if any(c in tok.text for c in ".eE"):
                from decimal import Decimal

                return Literal(str(Decimal(tok.text)), "decimal")
            return Literal(tok.text, "integer")
        if tok.kind == "name" and tok.text in ("true", "false"):
            self.next()
            return Literal(tok.text, "boolean")
        return None

    # -- paths
    def path(self) -> PathExpr:
        items = [self.path_sequence()]
        while self.at("|"):
            self.next()
            items.append(self.path_sequence())
        return items[0] if len(items) == 1 else PathAlt(tuple(items))

    def path_sequence(self) -> PathExpr:
        items = [self.path_elt()]
        while self.at("/"):
            self.next()
            items.append(self.path_elt())
        return items[0] if len(items) == 1 else PathSeq(tuple(items))

    def path_elt(self) -> PathExpr:
        if self.at("^"):
            raise UnsupportedFeature("inverse path '^'")
        if self.at("!"):
            raise UnsupportedFeature("negated property set '!'")
        if self.at("("):
            self.next()
            primary = self.path()
            self.expect(")")
        elif self.tok.kind == "name" and self.tok.text == "a":
            self.next()
            primary = PathPred(RDF_TYPE)
        elif self.tok.kind in ("iri", "pname"):
            primary = PathPred(self.iri())
        else:
            raise self.error("expected a predicate or property path")
        if self.at("*"):
            self.next()
            return PathStar(primary)
        if self.at("+"):
            raise UnsupportedFeature("one-or-more path '+'")
        if self.at("?"):
            raise UnsupportedFeature("zero-or-one path '?'")
        if self.at("{"):
            raise UnsupportedFeature("path length range")
        return primary

    # -- expressions
    def expression(self) -> Expression:
        left = self.and_expr()
        while self.at("||"):
            self.next()
            left = BinOp("||", left, self.and_expr())
        return left

    def and_expr(self) -> Expression:
        left = self.relational()
        while self.at("&&"):
            self.next()
            left = BinOp("&&", left, self.relational())
        return left

    def relational(self) -> Expression:
        left = self.additive()
        if self.at("=", "!=", "<", ">", "<=", ">="):
            op = self.next().text
            return BinOp(op, left, self.additive())
        if self.at_kw("IN") or (self.at_kw("NOT") and self.peek().upper == "IN"):
            raise UnsupportedFeature("IN")
        return left

    def additive(self) -> Expression:
        left = self.multiplicative()
        while self.at("+", "-"):
            op = self.next().text
            left = BinOp(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> Expression:
        left = self.unary()
        while self.at("*", "/"):
            op = self.next().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expression:
        if self.at("!", "-", "+"):
            op = self.next().text
            return UnaryOp(op, self.unary())
        return self.primary()

    def primary(self) -> Expression:
        tok = self.tok
        if self.at("("):
            self.next()
            expr = self.expression()
            self.expect(")")
            return expr
        if tok.kind == "var":
            self.next()
            return VarRef(tok.text[1:])
        lit = self.literal()
        if lit is not None:
            return Const(lit)
        if tok.kind == "iri" or (tok.kind == "pname" and self.peek().text != "("):
            return Const(self.iri())
        if tok.kind in ("iri", "pname"):
            raise UnsupportedFeature(f"function {tok.text}")
        if tok.kind == "name":
            name = tok.upper
            if self.peek().text != "(":
                raise self.error("unexpected keyword in expression")
            if name == "IF":
                self.next()
                self.expect("(")
                cond = self.expression()
                self.expect(",")
                then = self.expression()
                self.expect(",")
                other = self.expression()
                self.expect(")")
                return IfExpr(cond, then, other)
            if name in _AGGREGATES:
                return self.aggregate()
            if name in ("EXISTS", "NOT"):
                raise UnsupportedFeature("EXISTS")
            raise UnsupportedFeature(name)
        raise self.error("expected an expression")

    def aggregate(self) -> Aggregate:
        name = self.next().upper
        self.expect("(")
        distinct = False
        if self.at_kw("DISTINCT"):
            self.next()
            distinct = True
        arg: Expression | None
        if self.at("*"):
            if name != "COUNT":
                raise self.error(f"{name}(*) is not allowed")
            self.next()
            arg = None
        else:
            arg = self.expression()
        separator = " "
        if name == "GROUP_CONCAT" and self.at(";"):
            self.next()
            self.expect_kw("SEPARATOR")
            self.expect("=")
            tok = self.next()
            if tok.kind != "string":
                raise self.error("expected a string separator", tok)
            separator = _unescape(tok.text[1:-1])
        self.expect(")")
        if arg is not None and aggregates_in(arg):
            raise QuerySyntaxError("nested aggregate", self.tok.line, self.tok.col)
        return Aggregate(name, arg, distinct, separator)


def _contains_aggregate(expr: Expression) -> bool:
    return bool(aggregates_in(expr))


def _check(ast: QueryAst) -> None:
    """Static rules: aggregates only in projections, grouped projections, fresh BIND targets."""
    for f in ast.filters:
        if _contains_aggregate(f):
            raise QuerySyntaxError("aggregate inside FILTER", 0, 0)
    bound = set(ast.pattern_vars())
    for b in ast.binds:
        if _contains_aggregate(b.expr):
            raise QuerySyntaxError("aggregate inside BIND", 0, 0)
        if b.var in bound:
            raise QuerySyntaxError(f"BIND target ?{b.var} is already bound", 0, 0)
        bound.add(b.var)
    names = [p.var for p in ast.projection]
    if len(set(names)) != len(names):
        raise QuerySyntaxError("duplicate projection variable", 0, 0)
    for p in ast.projection:
        if p.expr is not None and p.var in bound:
            raise QuerySyntaxError(f"projection target ?{p.var} is already bound", 0, 0)
    if ast.is_grouped:
        if not ast.projection:
            raise QuerySyntaxError("SELECT * with grouping", 0, 0)
        grouped = set(ast.group_by)
        for p in ast.projection:
            loose = {p.var} if p.expr is None else vars_outside_aggregates(p.expr)
            bad = loose - grouped
            if bad:
                raise QuerySyntaxError(
                    f"?{sorted(bad)[0]} is projected but neither grouped nor aggregated", 0, 0
                )
    unknown = {v for p in ast.projection if p.expr is not None for v in expr_vars(p.expr)} - bound
    if unknown and not ast.is_grouped:
        raise QuerySyntaxError(f"?{sorted(unknown)[0]} is not bound by the pattern", 0, 0)


def parse_query(text: str) -> QueryAst:
    return _Parser(text).parse()
