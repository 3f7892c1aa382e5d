"""Rendering of solution tables as CSV, aligned text or JSON."""

from __future__ import annotations

import csv
import io
import json

from ..ldgraph import Literal
from .evaluator import SolutionTable, canonical

FORMATS = ("csv", "table", "json")


def to_csv(table: SolutionTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([canonical(v) for v in row])
    return buf.getvalue()


def to_table(table: SolutionTable) -> str:
    cells = [list(table.columns)] + [[canonical(v) for v in row] for row in table.rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(table.columns))]
    lines = []
    for n, r in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _binding(value) -> dict:
    if isinstance(value, Literal):
        out = {"type": "literal", "value": value.lexical}
        if value.datatype != "string":
            out["datatype"] = value.datatype_iri
        return out
    return {"type": "uri", "value": value}


def to_json(table: SolutionTable) -> str:
    doc = {
        "head": {"vars": list(table.columns)},
        "results": {
            "bindings": [
                {c: _binding(v) for c, v in zip(table.columns, row) if v is not None} for row in table.rows
            ]
        },
    }
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def render(table: SolutionTable, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "table":
        return to_table(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
