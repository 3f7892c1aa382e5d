"""Namespace registry and the closed catalog of classes and properties.

Every other module refers to vocabulary terms through the constants defined
here (``PROV.used``, ``DCTERMS.title`` ...), never through hand-written IRIs.
"""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterator, Mapping

from .errors import InvalidIri, UnknownPrefix, UnknownProperty

log = logging.getLogger(__name__)

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_WS = re.compile(r"\s")

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
PROV_NS = "http://www.w3.org/ns/prov#"
DCAT_NS = "http://www.w3.org/ns/dcat#"
DCTERMS_NS = "http://purl.org/dc/terms/"
QUDT_NS = "http://qudt.org/schema/qudt/"
UNIT_NS = "http://qudt.org/vocab/unit/"
ROBOVAST_NS = "https://purl.org/robovast/metamodels#"
SMM_NS = "https://purl.org/robovast/metamodels/smm#"

BUILTIN_PREFIXES: Mapping[str, str] = MappingProxyType(
    {
        "rdf": RDF_NS,
        "xsd": XSD_NS,
        "prov": PROV_NS,
        "dcat": DCAT_NS,
        "dcterms": DCTERMS_NS,
        "qudt": QUDT_NS,
        "unit": UNIT_NS,
        "robovast": ROBOVAST_NS,
        "smm": SMM_NS,
    }
)

STANDARD_PREFIXES = frozenset({"rdf", "xsd", "prov", "dcat", "dcterms", "qudt", "unit"})
CUSTOM_PREFIXES = frozenset({"robovast", "smm"})


def is_absolute_iri(value: str) -> bool:
    return bool(_SCHEME.match(value)) and not _WS.search(value)


def check_iri(value: str) -> str:
    if not isinstance(value, str) or not is_absolute_iri(value):
        raise InvalidIri(f"not an absolute IRI: {value!r}")
    return value


@dataclass(frozen=True, order=True)
class Term:
    """A compact ``prefix:local`` name."""

    prefix: str
    local: str

    @classmethod
    def parse(cls, curie: str) -> "Term":
        prefix, sep, local = curie.partition(":")
        if not sep or not prefix:
            raise ValueError(f"not a prefixed name: {curie!r}")
        return cls(prefix, local)

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}"


class ObjectKind(enum.Enum):
    NODE = "node-reference"
    STRING = "string"
    INTEGER = "integer"
    DECIMAL = "decimal"
    BOOLEAN = "boolean"
    DATETIME = "dateTime"

    @property
    def is_literal(self) -> bool:
        return self is not ObjectKind.NODE


@dataclass(frozen=True)
class PrefixTable:
    """Prefix to namespace map plus an optional base for relative ids.

    The built-in prefixes are always present; ``extra`` entries may add to
    them but never remove one.
    """

    entries: Mapping[str, str] = field(default_factory=lambda: dict(BUILTIN_PREFIXES))
    base: str | None = None

    def __post_init__(self) -> None:
        merged = dict(BUILTIN_PREFIXES)
        merged.update(self.entries)
        for prefix, ns in merged.items():
            if not ns:
                raise ValueError(f"prefix {prefix!r} maps to an empty namespace")
        object.__setattr__(self, "entries", MappingProxyType(merged))
        # longest namespace first so compaction picks the most specific match
        ordered = sorted(merged.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        object.__setattr__(self, "_by_length", tuple(ordered))

    def with_base(self, base: str | None) -> "PrefixTable":
        return PrefixTable(dict(self.entries), base)

    def with_prefixes(self, extra: Mapping[str, str]) -> "PrefixTable":
        merged = dict(self.entries)
        merged.update(extra)
        return PrefixTable(merged, self.base)

    def __contains__(self, prefix: str) -> bool:
        return prefix in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def namespaces(self) -> list[tuple[str, str]]:
        return list(self._by_length)  # type: ignore[attr-defined]


DEFAULT_TABLE = PrefixTable()


def expand(term: Term | str, table: PrefixTable = DEFAULT_TABLE) -> str:
    if isinstance(term, str):
        term = Term.parse(term)
    try:
        return table.entries[term.prefix] + term.local
    except KeyError:
        raise UnknownPrefix(term.prefix) from None


def compact(iri: str, table: PrefixTable = DEFAULT_TABLE) -> Term | str:
    """Return the Term for the longest matching namespace, else ``iri`` unchanged."""
    for prefix, ns in table.namespaces():
        if iri.startswith(ns) and len(iri) > len(ns):
            return Term(prefix, iri[len(ns):])
    return iri


def expand_curie(value: str, table: PrefixTable = DEFAULT_TABLE) -> str:
    """Expand ``value`` if it is a CURIE with a registered prefix, else return it as is."""
    prefix, sep, local = value.partition(":")
    if sep and prefix in table.entries and not local.startswith("//"):
        return table.entries[prefix] + local
    return value


class _Namespace:
    """Attribute access to the full IRIs of one prefix's catalog terms."""

    def __init__(self, prefix: str) -> None:
        self._prefix = prefix
        self._ns = BUILTIN_PREFIXES[prefix]

    def __getattr__(self, local: str) -> str:
        if local.startswith("_"):
            raise AttributeError(local)
        return self._ns + local

    def __getitem__(self, local: str) -> str:
        return self._ns + local

    def term(self, local: str) -> Term:
        return Term(self._prefix, local)


RDF = _Namespace("rdf")
XSD = _Namespace("xsd")
PROV = _Namespace("prov")
DCAT = _Namespace("dcat")
DCTERMS = _Namespace("dcterms")
QUDT = _Namespace("qudt")
UNIT = _Namespace("unit")
ROBOVAST = _Namespace("robovast")
SMM = _Namespace("smm")

RDF_TYPE = RDF.type

_K = ObjectKind

CLASSES: frozenset[Term] = frozenset(
    Term.parse(c)
    for c in (
        "rdf:Property",
        "prov:Entity",
        "prov:Activity",
        "prov:Agent",
        "prov:Person",
        "prov:SoftwareAgent",
        "prov:Collection",
        "prov:Location",
        "dcat:Dataset",
        "dcat:Distribution",
        "smm:AbstractScenario",
        "smm:ConcreteScenario",
        "smm:EnvironmentModel",
        "smm:ScenarioVariation",
        "robovast:Campaign",
        "robovast:TestExecution",
        "robovast:RobotConfiguration",
        "robovast:LoadConfig",
        "robovast:ScenarioGeneration",
        "robovast:EnvironmentGeneration",
        "robovast:Postprocessing",
        "robovast:Artifact",
        "robovast:Robot",
    )
)

PROPERTIES: Mapping[Term, ObjectKind] = MappingProxyType(
    {
        Term.parse(k): v
        for k, v in {
            "prov:used": _K.NODE,
            "prov:wasGeneratedBy": _K.NODE,
            "prov:wasDerivedFrom": _K.NODE,
            "prov:wasAttributedTo": _K.NODE,
            "prov:wasAssociatedWith": _K.NODE,
            "prov:wasInformedBy": _K.NODE,
            "prov:hadMember": _K.NODE,
            "prov:atLocation": _K.NODE,
            "prov:startedAtTime": _K.DATETIME,
            "prov:endedAtTime": _K.DATETIME,
            "dcat:distribution": _K.NODE,
            "dcat:keyword": _K.STRING,
            "dcat:byteSize": _K.INTEGER,
            "dcat:mediaType": _K.STRING,
            "dcterms:title": _K.STRING,
            "dcterms:description": _K.STRING,
            "dcterms:creator": _K.NODE,
            "dcterms:license": _K.STRING,
            "dcterms:identifier": _K.STRING,
            "dcterms:issued": _K.DATETIME,
            "dcterms:created": _K.DATETIME,
            "dcterms:modified": _K.DATETIME,
            "dcterms:hasVersion": _K.STRING,
            "dcterms:references": _K.NODE,
            "qudt:unit": _K.NODE,
            "robovast:success": _K.BOOLEAN,
            "robovast:n_obstacles": _K.INTEGER,
            "robovast:n_runs": _K.INTEGER,
            "robovast:n_configs": _K.INTEGER,
            "robovast:robotRadius": _K.DECIMAL,
            "robovast:pathLength": _K.DECIMAL,
            "robovast:obstacleDensity": _K.DECIMAL,
            "robovast:startPose": _K.STRING,
            "robovast:goalPose": _K.STRING,
            "robovast:obstaclePose": _K.STRING,
            "robovast:seed": _K.INTEGER,
            "robovast:duration": _K.DECIMAL,
            "robovast:relativePath": _K.STRING,
            "robovast:artifactKind": _K.STRING,
            "robovast:sha256": _K.STRING,
            "robovast:plugin": _K.STRING,
            "robovast:parameter": _K.STRING,
            "robovast:name": _K.STRING,
            "robovast:hardware": _K.STRING,
            "robovast:middlewareDistribution": _K.STRING,
            "robovast:middlewareVersion": _K.STRING,
            "robovast:runtimeEnvironment": _K.STRING,
            "robovast:messageType": _K.STRING,
            "robovast:mapLocation": _K.STRING,
            "robovast:launchFile": _K.STRING,
        }.items()
    }
)

# IRI -> kind, for lookups by full predicate IRI
_KIND_BY_IRI: Mapping[str, ObjectKind] = MappingProxyType(
    {expand(t): k for t, k in PROPERTIES.items()}
)

CLASS_IRIS: frozenset[str] = frozenset(expand(c) for c in CLASSES)

FUNCTIONAL_PROPERTIES: frozenset[str] = frozenset(
    {DCTERMS.identifier, ROBOVAST.success, PROV.startedAtTime, PROV.endedAtTime}
)

# properties whose literal values are in metres / seconds
UNITS: Mapping[str, str] = MappingProxyType(
    {
        ROBOVAST.robotRadius: UNIT.M,
        ROBOVAST.pathLength: UNIT.M,
        ROBOVAST.duration: UNIT.SEC,
    }
)


def object_kind(prop: Term | str) -> ObjectKind | None:
    """Declared object kind of a catalog property.

    Unknown terms in the custom namespaces pass through with a warning and
    yield ``None``; anything else outside the catalog is rejected.
    """
    iri = expand(prop) if isinstance(prop, Term) else expand_curie(prop)
    kind = _KIND_BY_IRI.get(iri)
    if kind is not None:
        return kind
    if iri.startswith(ROBOVAST_NS) or iri.startswith(SMM_NS):
        log.warning("uncatalogued custom property %s accepted", prop)
        return None
    raise UnknownProperty(str(prop))


def is_catalog_property(iri: str) -> bool:
    return iri in _KIND_BY_IRI


def namespace_of(iri: str, table: PrefixTable = DEFAULT_TABLE) -> str | None:
    term = compact(iri, table)
    return term.prefix if isinstance(term, Term) else None
