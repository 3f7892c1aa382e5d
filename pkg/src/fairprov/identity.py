"""Deterministic identifiers for dataset elements, people, agents and DOIs."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import PurePath
from urllib.parse import quote, urlsplit

from .errors import InvalidDoi, InvalidIri, InvalidOrcid, InvalidPath
from .ldgraph import Literal

ORCID_BASE = "https://orcid.org/"
DOI_BASE = "https://doi.org/"
_ORCID = re.compile(r"^\d{4}-\d{4}-\d{4}-\d{3}[\dX]$")


@dataclass(frozen=True)
class BaseIri:
    """The dataset PURL, stored without a trailing slash."""

    value: str

    def __post_init__(self) -> None:
        value = self.value.strip() if isinstance(self.value, str) else ""
        value = value.rstrip("/")
        parts = urlsplit(value)
        if parts.scheme != "https" or not parts.netloc:
            raise InvalidIri(f"dataset base must be an https IRI, got {self.value!r}")
        if any(c.isspace() for c in value) or parts.query or parts.fragment:
            raise InvalidIri(f"dataset base must be a plain https IRI, got {self.value!r}")
        object.__setattr__(self, "value", value)

    def __str__(self) -> str:
        return self.value

    def contains(self, iri: str) -> bool:
        return iri == self.value or iri.startswith(self.value + "/")


@dataclass(frozen=True)
class RelPath:
    segments: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise InvalidPath("empty path")
        for seg in self.segments:
            if seg in ("", ".", ".."):
                raise InvalidPath(f"invalid path segment {seg!r} in {'/'.join(self.segments)!r}")

    @classmethod
    def parse(cls, path: "str | PurePath | RelPath") -> "RelPath":
        if isinstance(path, RelPath):
            return path
        if isinstance(path, PurePath):
            if path.is_absolute():
                raise InvalidPath(f"absolute path {path}")
            text = path.as_posix()
        else:
            text = str(path).replace("\\", "/")
        if text.startswith("/") or re.match(r"^[A-Za-z]:/", text):
            raise InvalidPath(f"absolute path {text!r}")
        return cls(tuple(text.split("/")))

    def __str__(self) -> str:
        return "/".join(self.segments)

    def __truediv__(self, other: str) -> "RelPath":
        return RelPath(self.segments + RelPath.parse(other).segments)


def _as_base(base: "BaseIri | str") -> BaseIri:
    return base if isinstance(base, BaseIri) else BaseIri(base)


def mint_from_path(base: "BaseIri | str", path: "RelPath | str | PurePath") -> str:
    """``base/seg/seg...`` with every character outside the unreserved set percent-encoded."""
    rel = RelPath.parse(path)
    encoded = "/".join(quote(seg, safe="") for seg in rel.segments)
    return f"{_as_base(base).value}/{encoded}"


def run_identifier(base: "BaseIri | str", run_dir: "RelPath | str | PurePath") -> str:
    return mint_from_path(base, run_dir)


def mint_agent(base: "BaseIri | str", name: str, configured: dict[str, str] | None = None) -> str:
    """Software-agent PURL: the configured one, else ``<base>/agents/<name>``."""
    if configured and name in configured:
        return configured[name]
    return mint_from_path(base, RelPath(("agents", name)))


def orcid_check_digit(digits: str) -> str:
    """ISO 7064 MOD 11-2 check character over the first 15 digits."""
    total = 0
    for ch in digits:
        total = (total + int(ch)) * 2
    result = (12 - total % 11) % 11
    return "X" if result == 10 else str(result)


def validate_orcid(orcid: str) -> str:
    orcid = orcid.strip()
    if orcid.startswith(ORCID_BASE):
        orcid = orcid[len(ORCID_BASE):]
    if not _ORCID.match(orcid):
        raise InvalidOrcid(f"malformed ORCID {orcid!r}")
    digits = orcid.replace("-", "")
    if orcid_check_digit(digits[:15]) != digits[15]:
        raise InvalidOrcid(f"ORCID checksum failure for {orcid!r}")
    return orcid


def mint_person(orcid: str) -> str:
    return ORCID_BASE + validate_orcid(orcid)


def validate_doi(doi: str) -> str:
    doi = doi.strip()
    if doi.startswith(DOI_BASE):
        doi = doi[len(DOI_BASE):]
    prefix, sep, suffix = doi.partition("/")
    if not doi.startswith("10.") or not sep or not suffix or len(prefix) < 4:
        raise InvalidDoi(f"not a DOI: {doi!r}")
    if any(c.isspace() for c in doi):
        raise InvalidDoi(f"DOI contains whitespace: {doi!r}")
    return doi


def doi_identifier(doi: str) -> Literal:
    return Literal(DOI_BASE + validate_doi(doi))


class DatasetNaming:
    """IRI conventions for every element of one campaign dataset.

    File-backed entities are named by their relative path. The file itself
    (the ``prov:atLocation`` target) lives under the reserved ``files/``
    segment so the entity and its location never share an id.
    """

    LOCATION_ROOT = "files"

    def __init__(self, base: "BaseIri | str", agents: dict[str, str] | None = None) -> None:
        self.base = _as_base(base)
        self._agents = dict(agents or {})

    @property
    def dataset(self) -> str:
        return self.base.value

    def element(self, path: "RelPath | str") -> str:
        return mint_from_path(self.base, path)

    def location(self, path: "RelPath | str") -> str:
        return mint_from_path(self.base, RelPath((self.LOCATION_ROOT,)) / str(RelPath.parse(path)))

    def activity(self, path: "RelPath | str", name: str) -> str:
        return mint_from_path(self.base, RelPath.parse(path) / name)

    def collection(self, name: str) -> str:
        return mint_from_path(self.base, name)

    def agent(self, name: str) -> str:
        return mint_agent(self.base, name, self._agents)

    def person(self, name: str, orcid: str | None = None) -> str:
        if orcid:
            return mint_person(orcid)
        slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-") or "anonymous"
        return mint_from_path(self.base, RelPath(("agents", "persons", slug)))

    def distribution(self, name: str) -> str:
        return mint_from_path(self.base, RelPath(("distributions", name)))

    @property
    def campaign(self) -> str:
        return mint_from_path(self.base, "campaign")

    @property
    def scenario_generation(self) -> str:
        return mint_from_path(self.base, "activities/scenario_generation")

    def load_config(self, config_dir: str) -> str:
        return self.activity(config_dir, "load_config")

    def robot_configuration(self, config_dir: str) -> str:
        return self.element(RelPath.parse(config_dir) / "robot")
