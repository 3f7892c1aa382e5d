"""Linked-data document model, triple conversion and the JSON-LD profile.

The on-disk profile is deliberately narrow: one top-level ``@context``
(prefixes plus ``@base``) and one flat ``@graph`` array of node objects.
Values are either IRI references (``{"@id": ...}``) or literals of the five
XML Schema datatypes the toolkit uses. Blank nodes are never produced and
never accepted.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from typing import Iterable, Iterator, NamedTuple, Union
from urllib.parse import urljoin

from .errors import (
    BlankNodeUnsupported,
    ConflictingFunctionalValue,
    IncompatibleBase,
    MalformedInput,
    UnsupportedJsonLdFeature,
)
from .vocab import (
    DEFAULT_TABLE,
    FUNCTIONAL_PROPERTIES,
    RDF_TYPE,
    XSD_NS,
    PrefixTable,
    Term,
    compact,
    expand_curie,
    is_absolute_iri,
)

DATATYPES = ("string", "integer", "decimal", "boolean", "dateTime")


def _canonical_decimal(value: Decimal) -> str:
    if not value.is_finite():
        raise ValueError(f"non-finite decimal {value}")
    text = format(value.normalize(), "f")
    if "." not in text:
        text += ".0"
    if text.startswith("-0.") and Decimal(text) == 0:
        text = text[1:]
    return text


_DATETIME = re.compile(
    r"^(\d{4}-\d\d-\d\d)[T ](\d\d:\d\d:\d\d)(?:\.(\d+))?(Z|[+-]\d\d:?\d\d)?$"
)


def parse_datetime(text: str) -> datetime:
    """ISO 8601 timestamp with any number of fractional digits."""
    m = _DATETIME.match(text)
    if m is None:
        raise ValueError(f"invalid dateTime {text!r}")
    date, clock, frac, zone = m.groups()
    if zone == "Z":
        zone = "+00:00"
    elif zone and ":" not in zone:
        zone = zone[:3] + ":" + zone[3:]
    frac = (frac or "")[:6].ljust(6, "0")
    try:
        dt = datetime.fromisoformat(f"{date}T{clock}.{frac}{zone or ''}")
    except ValueError as exc:
        raise ValueError(f"invalid dateTime {text!r}") from exc
    return dt


def _canonical_datetime(text: str) -> str:
    dt = parse_datetime(text)
    if dt.tzinfo is None:
        raise ValueError(f"dateTime without UTC offset: {text!r}")
    dt = dt.astimezone(timezone.utc)
    stamp = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        stamp += f".{dt.microsecond:06d}".rstrip("0")
    return stamp + "Z"


@dataclass(frozen=True, order=True)
class Literal:
    """A typed literal in canonical lexical form."""

    lexical: str
    datatype: str = "string"

    def __post_init__(self) -> None:
        dt = self.datatype
        if dt not in DATATYPES:
            raise ValueError(f"unsupported datatype {dt!r}")
        lex = self.lexical
        try:
            if dt == "integer":
                canon = str(int(lex.strip()))
            elif dt == "decimal":
                canon = _canonical_decimal(Decimal(lex.strip()))
            elif dt == "boolean":
                low = lex.strip()
                if low in ("true", "1"):
                    canon = "true"
                elif low in ("false", "0"):
                    canon = "false"
                else:
                    raise ValueError(f"invalid boolean {lex!r}")
            elif dt == "dateTime":
                canon = _canonical_datetime(lex.strip())
            else:
                canon = lex
        except (InvalidOperation, ValueError) as exc:
            raise ValueError(f"invalid {dt} literal {lex!r}: {exc}") from None
        object.__setattr__(self, "lexical", canon)

    @classmethod
    def of(cls, value: object) -> "Literal":
        """Build a literal from a plain Python value."""
        if isinstance(value, Literal):
            return value
        if isinstance(value, bool):
            return cls("true" if value else "false", "boolean")
        if isinstance(value, int):
            return cls(str(value), "integer")
        if isinstance(value, Decimal):
            return cls(str(value), "decimal")
        if isinstance(value, float):
            return cls(repr(value), "decimal")
        if isinstance(value, datetime):
            return cls(value.isoformat(), "dateTime")
        if isinstance(value, str):
            return cls(value, "string")
        raise TypeError(f"cannot make a literal from {type(value).__name__}")

    def to_python(self) -> object:
        dt = self.datatype
        if dt == "integer":
            return int(self.lexical)
        if dt == "decimal":
            return Decimal(self.lexical)
        if dt == "boolean":
            return self.lexical == "true"
        if dt == "dateTime":
            return parse_datetime(self.lexical)
        return self.lexical

    @property
    def datatype_iri(self) -> str:
        return XSD_NS + self.datatype

    def __str__(self) -> str:
        return self.lexical


Value = Union[str, Literal]  # str values are IRI references


class Triple(NamedTuple):
    subject: str
    predicate: str
    object: Value


def _sort_key(value: Value) -> tuple:
    if isinstance(value, Literal):
        return (1, value.datatype, value.lexical)
    return (0, "", value)


def _check_id(iri: str) -> str:
    if not isinstance(iri, str):
        raise MalformedInput(f"node id must be a string, got {iri!r}")
    if iri.startswith("_:"):
        raise BlankNodeUnsupported(f"blank node {iri!r}")
    if not is_absolute_iri(iri):
        raise MalformedInput(f"node id is not an absolute IRI: {iri!r}")
    return iri


@dataclass
class NodeObject:
    id: str
    types: list[str] = field(default_factory=list)
    properties: dict[str, list[Value]] = field(default_factory=dict)

    def add_type(self, type_iri: str) -> None:
        if type_iri not in self.types:
            self.types.append(type_iri)

    def add(self, predicate: str, value: Value) -> None:
        """Append a value unless the (predicate, value) pair is already present."""
        if predicate == RDF_TYPE and isinstance(value, str):
            self.add_type(value)
            return
        values = self.properties.setdefault(predicate, [])
        if value not in values:
            values.append(value)

    def set(self, predicate: str, value: Value) -> None:
        """Add to a single-valued property, refusing a different existing value."""
        current = self.properties.get(predicate)
        if current and value not in current:
            raise ConflictingFunctionalValue(self.id, predicate, current + [value])
        self.add(predicate, value)

    def get(self, predicate: str) -> list[Value]:
        return self.properties.get(predicate, [])

    def first(self, predicate: str) -> Value | None:
        values = self.properties.get(predicate)
        return values[0] if values else None

    def remove(self, predicate: str, value: Value | None = None) -> None:
        if value is None:
            self.properties.pop(predicate, None)
            return
        values = self.properties.get(predicate)
        if values and value in values:
            values.remove(value)
            if not values:
                del self.properties[predicate]

    def is_a(self, type_iri: str) -> bool:
        return type_iri in self.types

    def triple_count(self) -> int:
        return len(self.types) + sum(len(v) for v in self.properties.values())


@dataclass
class LinkedDocument:
    context: PrefixTable = field(default_factory=lambda: DEFAULT_TABLE)
    nodes: dict[str, NodeObject] = field(default_factory=dict)

    @property
    def base(self) -> str | None:
        return self.context.base

    def node(self, iri: str, *types: str) -> NodeObject:
        """Get or create the node ``iri``, adding ``types``."""
        found = self.nodes.get(iri)
        if found is None:
            found = self.nodes[iri] = NodeObject(_check_id(iri))
        for t in types:
            found.add_type(t)
        return found

    def add(self, subject: str, predicate: str, value: Value) -> None:
        self.node(subject).add(predicate, value)

    def __contains__(self, iri: str) -> bool:
        return iri in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def of_type(self, type_iri: str) -> list[NodeObject]:
        return [n for n in self.nodes.values() if type_iri in n.types]

    def triples(self) -> Iterator[Triple]:
        for node in self.nodes.values():
            for t in node.types:
                yield Triple(node.id, RDF_TYPE, t)
            for pred, values in node.properties.items():
                for v in values:
                    yield Triple(node.id, pred, v)

    def triple_count(self) -> int:
        return sum(n.triple_count() for n in self.nodes.values())

    def remove_node(self, iri: str) -> NodeObject:
        return self.nodes.pop(iri)

    def rename_node(self, old: str, new: str) -> None:
        """Change a node id and every reference to it."""
        node = self.nodes.pop(old)
        node.id = _check_id(new)
        self.nodes[new] = node
        for other in self.nodes.values():
            for values in other.properties.values():
                for i, v in enumerate(values):
                    if v == old and isinstance(v, str):
                        values[i] = new

    def copy(self) -> "LinkedDocument":
        doc = LinkedDocument(self.context)
        for iri, n in self.nodes.items():
            doc.nodes[iri] = NodeObject(
                n.id, list(n.types), {p: list(v) for p, v in n.properties.items()}
            )
        return doc

    def dangling_references(self) -> list[tuple[str, str, str]]:
        """(subject, predicate, object) for references into the base that resolve to no node."""
        base = self.base
        if not base:
            return []
        prefix = base.rstrip("/") + "/"
        out = []
        for node in self.nodes.values():
            for pred, values in node.properties.items():
                for v in values:
                    if (
                        isinstance(v, str)
                        and (v.startswith(prefix) or v == base)
                        and v not in self.nodes
                    ):
                        out.append((node.id, pred, v))
        return out


def to_triples(doc: LinkedDocument) -> set[Triple]:
    return set(doc.triples())


def from_triples(triples: Iterable[Triple], context: PrefixTable = DEFAULT_TABLE) -> LinkedDocument:
    doc = LinkedDocument(context)
    for s, p, o in sorted(triples, key=lambda t: (t.subject, t.predicate, _sort_key(t.object))):
        if s.startswith("_:") or (isinstance(o, str) and o.startswith("_:")):
            raise BlankNodeUnsupported(f"blank node in triple ({s}, {p}, {o})")
        doc.add(s, p, o)
    return doc


# ---------------------------------------------------------------------------
# JSON-LD profile


def _base_prefix(base: str | None) -> str | None:
    return base.rstrip("/") + "/" if base else None


def _compact_id(iri: str, table: PrefixTable, base_prefix: str | None) -> str:
    if base_prefix and iri.startswith(base_prefix):
        rel = iri[len(base_prefix):]
        head = rel.split("/", 1)[0]
        if rel and ":" not in head and not rel.startswith((".", "#", "?")):
            return rel
    term = compact(iri, table)
    if isinstance(term, Term) and "/" not in term.local and "#" not in term.local:
        return str(term)
    return iri


def _compact_key(iri: str, table: PrefixTable) -> str:
    term = compact(iri, table)
    if isinstance(term, Term):
        return str(term)
    return iri


def _value_to_json(value: Value, table: PrefixTable, base_prefix: str | None) -> object:
    if isinstance(value, Literal):
        if value.datatype == "string":
            return value.lexical
        if value.datatype == "boolean":
            return value.lexical == "true"
        if value.datatype == "integer":
            return int(value.lexical)
        return {"@type": f"xsd:{value.datatype}", "@value": value.lexical}
    return {"@id": _compact_id(value, table, base_prefix)}


def to_jsonld(doc: LinkedDocument) -> dict:
    table = doc.context
    base_prefix = _base_prefix(doc.base)
    context: dict[str, str] = {}
    if base_prefix:
        context["@base"] = base_prefix
    for prefix in sorted(table.entries):
        context[prefix] = table.entries[prefix]
    graph = []
    for iri in sorted(doc.nodes):
        node = doc.nodes[iri]
        obj: dict[str, object] = {"@id": _compact_id(iri, table, base_prefix)}
        if node.types:
            obj["@type"] = [_compact_key(t, table) for t in sorted(node.types)]
        for pred in sorted(node.properties):
            values = sorted(node.properties[pred], key=_sort_key)
            if not values:
                continue
            rendered = [_value_to_json(v, table, base_prefix) for v in values]
            obj[_compact_key(pred, table)] = rendered[0] if len(rendered) == 1 else rendered
        graph.append(obj)
    return {"@context": context, "@graph": graph}


def serialize(doc: LinkedDocument) -> bytes:
    """Canonical JSON-LD bytes; a pure function of the document's logical content."""
    text = json.dumps(to_jsonld(doc), ensure_ascii=False, indent=1)
    return (text + "\n").encode("utf-8")


_VALUE_KEYS = frozenset({"@value", "@type"})
_FORBIDDEN = {
    "@reverse": "reverse properties",
    "@graph": "nested @graph",
    "@context": "embedded context",
    "@list": "@list containers",
    "@set": "@set containers",
    "@language": "language-tagged strings",
    "@included": "@included blocks",
    "@nest": "@nest blocks",
}


class _Reader:
    def __init__(self, table: PrefixTable) -> None:
        self.table = table
        self.base = _base_prefix(table.base)

    def iri(self, value: object, *, vocab: bool) -> str:
        if not isinstance(value, str) or not value:
            raise MalformedInput(f"expected an IRI string, got {value!r}")
        if value.startswith("_:"):
            raise BlankNodeUnsupported(f"blank node {value!r}")
        expanded = expand_curie(value, self.table)
        if is_absolute_iri(expanded):
            return expanded
        if vocab:
            raise MalformedInput(f"term {value!r} does not expand to an IRI")
        if not self.base:
            raise MalformedInput(f"relative IRI {value!r} without @base")
        return urljoin(self.base, value)

    def value(self, raw: object) -> Value:
        if isinstance(raw, bool):
            return Literal("true" if raw else "false", "boolean")
        if isinstance(raw, int):
            return Literal(str(raw), "integer")
        if isinstance(raw, float):
            return Literal(repr(raw), "decimal")
        if isinstance(raw, str):
            return Literal(raw, "string")
        if isinstance(raw, dict):
            for key, what in _FORBIDDEN.items():
                if key in raw and key != "@type":
                    raise UnsupportedJsonLdFeature(what)
            if "@id" in raw:
                if len(raw) > 1:
                    raise UnsupportedJsonLdFeature("nested node objects")
                return self.iri(raw["@id"], vocab=False)
            if "@value" in raw:
                if set(raw) - _VALUE_KEYS:
                    raise UnsupportedJsonLdFeature(f"value object keys {sorted(set(raw) - _VALUE_KEYS)}")
                lex = raw["@value"]
                dtype = raw.get("@type")
                if dtype is None:
                    return self.value(lex)
                dt_iri = self.iri(dtype, vocab=True)
                if not dt_iri.startswith(XSD_NS):
                    raise UnsupportedJsonLdFeature(f"datatype {dtype}")
                name = dt_iri[len(XSD_NS):]
                if name not in DATATYPES:
                    raise UnsupportedJsonLdFeature(f"datatype {dtype}")
                try:
                    return Literal(str(lex).lower() if isinstance(lex, bool) else str(lex), name)
                except ValueError as exc:
                    raise MalformedInput(str(exc)) from None
            raise UnsupportedJsonLdFeature("nested node objects")
        if isinstance(raw, list):
            raise UnsupportedJsonLdFeature("nested lists")
        raise MalformedInput(f"unsupported value {raw!r}")


def _read_context(ctx: object) -> PrefixTable:
    if isinstance(ctx, list):
        raise UnsupportedJsonLdFeature("multiple contexts")
    if isinstance(ctx, str):
        raise UnsupportedJsonLdFeature("remote contexts")
    if not isinstance(ctx, dict):
        raise MalformedInput("@context must be an object")
    prefixes: dict[str, str] = {}
    base = None
    for key, value in ctx.items():
        if key == "@base":
            if not isinstance(value, str) or not is_absolute_iri(value):
                raise MalformedInput(f"@base must be an absolute IRI, got {value!r}")
            base = value.rstrip("/")
        elif key.startswith("@"):
            raise UnsupportedJsonLdFeature(f"context keyword {key}")
        elif isinstance(value, str):
            prefixes[key] = value
        else:
            raise UnsupportedJsonLdFeature(f"expanded term definition for {key!r}")
    return DEFAULT_TABLE.with_prefixes(prefixes).with_base(base)


def from_jsonld(data: object) -> LinkedDocument:
    if isinstance(data, list):
        raise UnsupportedJsonLdFeature("top-level array without context")
    if not isinstance(data, dict):
        raise MalformedInput("JSON-LD document must be an object")
    extra = set(data) - {"@context", "@graph"}
    if extra:
        raise UnsupportedJsonLdFeature(f"top-level keys {sorted(extra)}")
    table = _read_context(data.get("@context", {}))
    graph = data.get("@graph", [])
    if not isinstance(graph, list):
        raise MalformedInput("@graph must be an array")
    reader = _Reader(table)
    doc = LinkedDocument(table)
    for raw in graph:
        if not isinstance(raw, dict):
            raise MalformedInput(f"node object expected, got {raw!r}")
        for key, what in _FORBIDDEN.items():
            if key in raw:
                raise UnsupportedJsonLdFeature(what)
        if "@id" not in raw:
            raise BlankNodeUnsupported("node object without @id")
        iri = reader.iri(raw["@id"], vocab=False)
        if iri in doc.nodes:
            raise MalformedInput(f"duplicate node id {iri}")
        node = doc.node(iri)
        types = raw.get("@type", [])
        for t in types if isinstance(types, list) else [types]:
            node.add_type(reader.iri(t, vocab=True))
        for key, raw_values in raw.items():
            if key in ("@id", "@type"):
                continue
            if key.startswith("@"):
                raise UnsupportedJsonLdFeature(f"keyword {key}")
            pred = reader.iri(key, vocab=True)
            items = raw_values if isinstance(raw_values, list) else [raw_values]
            for item in items:
                if item is None:
                    continue
                node.add(pred, reader.value(item))
        if not node.types and not node.properties:
            raise MalformedInput(f"node {iri} carries no statements")
    return doc


def parse(data: bytes | str) -> LinkedDocument:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedInput(f"invalid JSON: {exc}") from None
    return from_jsonld(obj)


def merge(docs: Iterable[LinkedDocument]) -> LinkedDocument:
    """Union of documents; equal ids are unioned, single-valued properties must agree."""
    docs = list(docs)
    bases = {d.base for d in docs if d.base}
    if len(bases) > 1:
        raise IncompatibleBase(f"documents have different bases: {sorted(bases)}")
    base = bases.pop() if bases else None
    prefixes: dict[str, str] = {}
    for d in docs:
        for prefix, ns in d.context.entries.items():
            if prefixes.setdefault(prefix, ns) != ns:
                raise IncompatibleBase(f"prefix {prefix!r} bound to two namespaces")
    out = LinkedDocument(DEFAULT_TABLE.with_prefixes(prefixes).with_base(base))
    for d in docs:
        for node in d.nodes.values():
            target = out.node(node.id, *node.types)
            for pred, values in node.properties.items():
                for v in values:
                    if pred in FUNCTIONAL_PROPERTIES:
                        target.set(pred, v)
                    else:
                        target.add(pred, v)
    return out
