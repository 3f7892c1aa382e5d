"""SELECT-subset query engine: basic graph patterns, property paths, FILTER, BIND and grouping."""

from __future__ import annotations

from importlib import resources

from .ast import PathAlt, PathExpr, PathPred, PathSeq, PathStar, QueryAst
from .evaluator import SolutionTable, as_store, canonical, eval_path, evaluate
from .parser import parse_query
from .results import FORMATS, render
from .store import TripleStore

__all__ = [
    "FORMATS",
    "PathAlt",
    "PathExpr",
    "PathPred",
    "PathSeq",
    "PathStar",
    "QueryAst",
    "SolutionTable",
    "TripleStore",
    "as_store",
    "bundled_query",
    "canonical",
    "eval_path",
    "evaluate",
    "parse_query",
    "query",
    "render",
]


def query(graph, text: str) -> SolutionTable:
    return evaluate(graph, parse_query(text))


def bundled_query(name: str) -> str:
    """Text of a cookbook query shipped in ``fairprov/queries`` (``.rq`` optional)."""
    if not name.endswith(".rq"):
        name += ".rq"
    return resources.files("fairprov").joinpath("queries").joinpath(name).read_text(encoding="utf-8")
