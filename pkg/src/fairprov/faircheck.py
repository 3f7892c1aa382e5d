"""Machine-checkable FAIR compliance rules over a consolidated dataset graph.

Each principle maps to one rule function returning a :class:`PrincipleCheck`.
Principles that depend on repository behaviour (indexing, protocol
guarantees, long-term preservation, community standards) are reported as
``manual`` with an explanation and are never guessed.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable
from urllib.parse import urlsplit

from .consolidate import root_inputs, validate_graph
from .errors import FairProvError
from .ldgraph import LinkedDocument, Literal, parse, serialize
from .vocab import (
    CUSTOM_PREFIXES,
    DCAT,
    DCTERMS,
    PROV,
    RDF_TYPE,
    ROBOVAST,
    STANDARD_PREFIXES,
    Term,
    compact,
)

PRINCIPLES = (
    "F1", "F2", "F3", "F4",
    "A1", "A1.1", "A1.2", "A2",
    "I1", "I2", "I3",
    "R1", "R1.1", "R1.2", "R1.3",
)
MANUAL = ("F4", "A1.1", "A1.2", "A2", "R1.3")
STATUSES = ("pass", "partial", "fail", "manual")

PERSISTENT_HOSTS = frozenset({"purl.org", "w3id.org", "orcid.org", "doi.org"})
QUALIFIED_THRESHOLD = 0.9

# dataset-level fields; F2 is the descriptive subset, R1 adds licensing and identity
DESCRIPTIVE_FIELDS = (DCTERMS.title, DCTERMS.description, DCTERMS.creator, DCAT.keyword)
RICH_FIELDS = DESCRIPTIVE_FIELDS + (DCTERMS.license, DCTERMS.identifier)
# attributes every root input model should carry for R1
INPUT_ATTRIBUTES = (DCTERMS.hasVersion, DCTERMS.modified, PROV.wasAttributedTo)
# edges whose targets count as references for I3
REFERENCE_PREDICATES = (PROV.used, PROV.wasDerivedFrom, DCTERMS.references)
QUALIFIERS = (DCTERMS.hasVersion, DCTERMS.modified)

_MANUAL_REASONS = {
    "F4": "registration in a searchable index is a property of the hosting repository",
    "A1.1": "openness and universal implementability of the access protocol is a repository guarantee",
    "A1.2": "authentication and authorisation are enforced by the hosting repository",
    "A2": "metadata persistence after data removal depends on the repository's preservation policy",
    "R1.3": (
        "lack of community standards and controlled vocabularies for robotics datasets; "
        "conformance needs expert review"
    ),
}


@dataclass(frozen=True)
class PrincipleCheck:
    id: str
    status: str
    evidence: tuple[str, ...] = ()
    message: str = ""

    def __post_init__(self) -> None:
        if self.id not in PRINCIPLES:
            raise ValueError(f"unknown principle {self.id!r}")
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if (self.status == "manual") != (self.id in MANUAL):
            raise ValueError(f"{self.id} cannot have status {self.status!r}")

    def as_dict(self) -> dict:
        return {"id": self.id, "status": self.status, "evidence": list(self.evidence), "message": self.message}


@dataclass(frozen=True)
class ComplianceReport:
    checks: tuple[PrincipleCheck, ...]
    criteria: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if [c.id for c in self.checks] != list(PRINCIPLES):
            raise ValueError("a report holds exactly one check per principle, in canonical order")

    def __getitem__(self, principle: str) -> PrincipleCheck:
        for c in self.checks:
            if c.id == principle:
                return c
        raise KeyError(principle)

    @property
    def summary(self) -> dict[str, int]:
        counts = Counter(c.status for c in self.checks)
        return {s: counts.get(s, 0) for s in STATUSES}

    @property
    def statuses(self) -> dict[str, str]:
        return {c.id: c.status for c in self.checks}

    @property
    def failed(self) -> bool:
        return any(c.status == "fail" for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "checks": [c.as_dict() for c in self.checks],
            "summary": self.summary,
            "criteria": self.criteria,
        }


def _curie(iri: str) -> str:
    return str(compact(iri))


def _dataset(doc: LinkedDocument):
    if doc.base and doc.base in doc.nodes and DCAT.Dataset in doc.nodes[doc.base].types:
        return doc.nodes[doc.base]
    found = sorted(doc.of_type(DCAT.Dataset), key=lambda n: n.id)
    return found[0] if found else None


def _present(node, predicate: str) -> bool:
    return any(not isinstance(v, Literal) or v.lexical.strip() for v in node.get(predicate))


def _missing(node, fields: tuple[str, ...]) -> list[str]:
    if node is None:
        return [_curie(f) for f in fields]
    return [_curie(f) for f in fields if not _present(node, f)]


def _persistent(iri: str, doc: LinkedDocument) -> bool:
    if any(iri.startswith(ns) for ns in doc.context.entries.values()):
        return True
    parts = urlsplit(iri)
    return parts.scheme == "https" and parts.hostname in PERSISTENT_HOSTS


def check_f1(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    bad = sorted(iri for iri in doc.nodes if not _persistent(iri, doc))
    owners: dict[str, list[str]] = {}
    for node in doc.nodes.values():
        for v in node.get(DCTERMS.identifier):
            if isinstance(v, Literal):
                owners.setdefault(v.lexical, []).append(node.id)
    shared = sorted(i for ids in owners.values() if len(ids) > 1 for i in ids)
    evidence = tuple(bad + shared)
    if evidence:
        parts = []
        if bad:
            parts.append(f"{len(bad)} node id(s) outside persistent schemes")
        if shared:
            parts.append(f"{len(shared)} node(s) share an identifier")
        return PrincipleCheck("F1", "fail", evidence, "; ".join(parts))
    return PrincipleCheck("F1", "pass", (), f"all {len(doc.nodes)} node ids use persistent, unique identifiers")


def check_f2(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    ds = _dataset(doc)
    missing = _missing(ds, DESCRIPTIVE_FIELDS)
    cite = (ds.id,) if ds is not None else ()
    if not missing:
        return PrincipleCheck("F2", "pass", cite, "dataset carries every descriptive field")
    if ds is not None and _present(ds, DCTERMS.title):
        return PrincipleCheck("F2", "partial", cite, "missing " + ", ".join(missing))
    return PrincipleCheck("F2", "fail", cite, "missing " + ", ".join(missing))


def check_f3(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    ds = _dataset(doc)
    if ds is None:
        return PrincipleCheck("F3", "fail", (), "no dataset node")
    ids = [v.lexical for v in ds.get(DCTERMS.identifier) if isinstance(v, Literal) and v.lexical.strip()]
    if ids and all(i != ds.id for i in ids):
        return PrincipleCheck("F3", "pass", (ds.id,), f"dataset identified by {ids[0]}")
    if ids:
        return PrincipleCheck("F3", "fail", (ds.id,), "dcterms:identifier repeats the node id")
    return PrincipleCheck("F3", "fail", (ds.id,), "dataset has no dcterms:identifier")


def check_a1(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    ds = _dataset(doc)
    if ds is None:
        return PrincipleCheck("A1", "fail", (), "no dataset node")
    bad = [ds.id] if urlsplit(ds.id).scheme != "https" else []
    for v in ds.get(DCTERMS.identifier):
        if isinstance(v, Literal) and urlsplit(v.lexical).scheme != "https":
            bad.append(f"{ds.id} dcterms:identifier {v.lexical}")
    for d in ds.get(DCAT.distribution):
        if isinstance(d, str) and urlsplit(d).scheme != "https":
            bad.append(d)
    missing: list[str] = []
    if dataset_dir is not None:
        root = Path(dataset_dir)
        for loc in doc.of_type(PROV.Location):
            for rel in loc.get(ROBOVAST.relativePath):
                if isinstance(rel, Literal) and not (root / rel.lexical).is_file():
                    missing.append(rel.lexical)
    evidence = tuple(sorted(bad) + sorted(missing))
    if evidence:
        return PrincipleCheck("A1", "fail", evidence, "identifiers not retrievable over HTTPS or files absent")
    return PrincipleCheck("A1", "pass", (ds.id,), "dataset and distributions resolve over HTTPS; all located files exist")


def check_i1(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    try:
        again = parse(serialize(doc))
    except FairProvError as exc:
        return PrincipleCheck("I1", "fail", (), f"document does not reparse: {exc}")
    if set(again.triples()) != set(doc.triples()):
        return PrincipleCheck("I1", "fail", (), "serialization does not round-trip")
    unmapped = set()
    for node in doc.nodes.values():
        for iri in list(node.properties) + list(node.types):
            if not isinstance(compact(iri, doc.context), Term):
                unmapped.add(iri)
    if unmapped:
        return PrincipleCheck("I1", "fail", tuple(sorted(unmapped)), "terms outside every declared namespace")
    return PrincipleCheck("I1", "pass", (), "round-trips through the JSON-LD profile; every term expands")


def _predicate_prefixes(doc: LinkedDocument) -> dict[str, str | None]:
    preds = {RDF_TYPE} if any(n.types for n in doc.nodes.values()) else set()
    for node in doc.nodes.values():
        preds.update(node.properties)
    out = {}
    for p in preds:
        term = compact(p, doc.context)
        out[p] = term.prefix if isinstance(term, Term) else None
    return out


def check_i2(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    prefixes = _predicate_prefixes(doc)
    if not prefixes:
        return PrincipleCheck("I2", "fail", (), "no predicates")
    standard = sorted(p for p, pre in prefixes.items() if pre in STANDARD_PREFIXES)
    custom = sorted(p for p, pre in prefixes.items() if pre not in STANDARD_PREFIXES)
    ratio = len(standard) / len(prefixes)
    msg = f"{len(standard)}/{len(prefixes)} predicates ({ratio:.1%}) from standard vocabularies"
    if not custom:
        return PrincipleCheck("I2", "pass", (), msg)
    known = sum(1 for p in custom if prefixes[p] in CUSTOM_PREFIXES)
    cite = tuple(_curie(p) for p in custom)
    if standard:
        return PrincipleCheck("I2", "partial", cite, f"{msg}; {known} from the toolkit's own namespaces")
    return PrincipleCheck("I2", "fail", cite, msg)


def check_i3(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    total = qualified = 0
    unqualified: set[str] = set()
    for node in doc.nodes.values():
        for pred in REFERENCE_PREDICATES:
            for v in node.get(pred):
                target = doc.nodes.get(v) if isinstance(v, str) else None
                if target is None or PROV.Entity not in target.types:
                    continue
                total += 1
                if any(_present(target, q) for q in QUALIFIERS):
                    qualified += 1
                else:
                    unqualified.add(v)
    if total == 0:
        return PrincipleCheck("I3", "pass", (), "no references to other entities")
    ratio = qualified / total
    msg = f"{qualified}/{total} references ({ratio:.1%}) point to versioned or dated entities"
    cite = tuple(sorted(unqualified))
    if ratio >= QUALIFIED_THRESHOLD:
        return PrincipleCheck("I3", "pass", cite, msg)
    if qualified:
        return PrincipleCheck("I3", "partial", cite, msg)
    return PrincipleCheck("I3", "fail", cite, msg)


def check_r1(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    ds = _dataset(doc)
    missing = _missing(ds, RICH_FIELDS)
    sparse = []
    for iri in sorted(root_inputs(doc)):
        node = doc.nodes.get(iri)
        gaps = _missing(node, INPUT_ATTRIBUTES)
        if gaps:
            sparse.append(f"{iri} lacks {', '.join(gaps)}")
    cite = ((ds.id,) if ds is not None else ()) + tuple(sparse)
    if not missing and not sparse:
        return PrincipleCheck("R1", "pass", cite, "dataset and every input model richly described")
    parts = []
    if missing:
        parts.append("dataset missing " + ", ".join(missing))
    if sparse:
        parts.append(f"{len(sparse)} input model(s) without version, modification date or attribution")
    status = "partial" if ds is not None and _present(ds, DCTERMS.title) else "fail"
    return PrincipleCheck("R1", status, cite, "; ".join(parts))


def check_r11(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    ds = _dataset(doc)
    if ds is None:
        return PrincipleCheck("R1.1", "fail", (), "no dataset node")
    licenses = [v for v in ds.get(DCTERMS.license) if not isinstance(v, Literal) or v.lexical.strip()]
    if licenses:
        shown = ", ".join(v.lexical if isinstance(v, Literal) else v for v in licenses)
        return PrincipleCheck("R1.1", "pass", (ds.id,), f"licensed under {shown}")
    return PrincipleCheck("R1.1", "fail", (ds.id,), "dataset has no dcterms:license")


def check_r12(doc: LinkedDocument, dataset_dir: Path | None) -> PrincipleCheck:
    violations = validate_graph(doc).by_category("provenance")
    if violations:
        cite = tuple(sorted({v.node for v in violations}))
        return PrincipleCheck("R1.2", "fail", cite, f"{len(violations)} provenance violation(s)")
    return PrincipleCheck("R1.2", "pass", (), "every entity has a complete provenance chain")


_RULES: dict[str, Callable[[LinkedDocument, Path | None], PrincipleCheck]] = {
    "F1": check_f1,
    "F2": check_f2,
    "F3": check_f3,
    "A1": check_a1,
    "I1": check_i1,
    "I2": check_i2,
    "I3": check_i3,
    "R1": check_r1,
    "R1.1": check_r11,
    "R1.2": check_r12,
}


def _criteria() -> dict:
    return {
        "F2": [_curie(f) for f in DESCRIPTIVE_FIELDS],
        "R1": {"dataset": [_curie(f) for f in RICH_FIELDS], "inputs": [_curie(f) for f in INPUT_ATTRIBUTES]},
        "I3": {"threshold": QUALIFIED_THRESHOLD, "qualifiers": [_curie(f) for f in QUALIFIERS]},
        "F1": {"hosts": sorted(PERSISTENT_HOSTS), "also": "declared vocabulary namespaces"},
    }


def check(doc: LinkedDocument | bytes | str, dataset_dir: str | Path | None = None) -> ComplianceReport:
    """Evaluate every principle against ``doc`` and, when given, the files under ``dataset_dir``."""
    if not isinstance(doc, LinkedDocument):
        doc = parse(doc)
    root = Path(dataset_dir) if dataset_dir is not None else None
    checks = []
    for pid in PRINCIPLES:
        if pid in MANUAL:
            checks.append(PrincipleCheck(pid, "manual", (), "manual review: " + _MANUAL_REASONS[pid]))
        else:
            checks.append(_RULES[pid](doc, root))
    return ComplianceReport(tuple(checks), _criteria())


_MARKERS = {"pass": "GREEN ", "partial": "ORANGE", "fail": "RED   ", "manual": "MANUAL"}
_ANSI = {"pass": "\x1b[32m", "partial": "\x1b[33m", "fail": "\x1b[31m", "manual": "\x1b[2m"}


def render_report(report: ComplianceReport, format: str = "text", *, color: bool = False) -> bytes:
    if format == "json":
        return (json.dumps(report.as_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode()
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    lines = []
    for c in report.checks:
        marker = _MARKERS[c.status]
        if color:
            marker = f"{_ANSI[c.status]}{marker}\x1b[0m"
        lines.append(f"{marker} {c.id:<5} {c.message}")
        for e in c.evidence[:5]:
            lines.append(f"             {e}")
        if len(c.evidence) > 5:
            lines.append(f"             ... {len(c.evidence) - 5} more")
    s = report.summary
    lines.append(f"pass {s['pass']}  partial {s['partial']}  fail {s['fail']}  manual {s['manual']}")
    return ("\n".join(lines) + "\n").encode()
