"""Archive-repository deposit protocol and DOI write-back."""

from __future__ import annotations

import enum
import logging
import os
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import httpx

from ..capture import CampaignManifest
from ..errors import AuthError, ConflictingFunctionalValue, DigestMismatch, ProtocolError
from ..identity import doi_identifier, validate_doi
from ..ldgraph import LinkedDocument, Literal
from ..vocab import DCAT, DCTERMS, ROBOVAST
from .packaging import MEDIA_TYPE, Archive, sha256_hex

log = logging.getLogger(__name__)

DEFAULT_TOKEN_ENV = "DEPOSIT_TOKEN"
TRANSIENT = frozenset({429, 500, 502, 503, 504})


class DepositState(enum.IntEnum):
    NEW = 0
    CREATED = 1
    FILES_UPLOADED = 2
    PUBLISHED = 3

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")


@dataclass(frozen=True)
class DepositSession:
    """Progress of one deposition. Sessions are immutable; every step returns a new one."""

    endpoint: str
    token_env: str = DEFAULT_TOKEN_ENV
    deposition_id: str | None = None
    bucket: str | None = None
    state: DepositState = DepositState.NEW
    uploaded: tuple[str, ...] = ()
    doi: str | None = None

    def __post_init__(self) -> None:
        if (self.doi is not None) != (self.state is DepositState.PUBLISHED):
            raise ValueError("doi is set exactly when the deposition is published")

    def advance(self, state: DepositState, **changes) -> "DepositSession":
        if state < self.state:
            raise ValueError(f"cannot move from {self.state.label} back to {state.label}")
        return replace(self, state=state, **changes)


def deposit_metadata(manifest: CampaignManifest) -> dict:
    meta = manifest.metadata
    creators = []
    for c in meta.creators:
        entry = {"name": c.name}
        if c.orcid:
            entry["orcid"] = c.orcid
        creators.append(entry)
    return {
        "title": meta.title,
        "description": meta.description,
        "creators": creators,
        "keywords": list(meta.keywords),
        "license": meta.license,
    }


@dataclass
class _Transport:
    client: httpx.Client
    token: str | None
    retries: int
    backoff: float
    calls: list[str] = field(default_factory=list)

    def request(self, method: str, url: str, *, retry: bool, **kw) -> httpx.Response:
        headers = kw.pop("headers", {})
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        attempts = self.retries + 1 if retry else 1
        for attempt in range(attempts):
            try:
                resp = self.client.request(method, url, headers=headers, **kw)
            except httpx.TransportError as exc:
                if attempt + 1 >= attempts:
                    raise ProtocolError(f"{method} {url}: {exc}") from exc
            else:
                if resp.status_code in (401, 403):
                    raise AuthError(f"{method} {url}: HTTP {resp.status_code}")
                if resp.status_code not in TRANSIENT or attempt + 1 >= attempts:
                    return resp
            log.info("transient failure on %s %s, retrying", method, url)
            time.sleep(self.backoff * (2**attempt))
        raise AssertionError("unreachable")


def _json(resp: httpx.Response, expected: tuple[int, ...], what: str) -> dict:
    if resp.status_code not in expected:
        raise ProtocolError(f"{what}: unexpected HTTP {resp.status_code}")
    try:
        body = resp.json()
    except ValueError as exc:
        raise ProtocolError(f"{what}: response is not JSON") from exc
    if not isinstance(body, dict):
        raise ProtocolError(f"{what}: response is not a JSON object")
    return body


def _archives(archives: Iterable[Archive | tuple[str, bytes]]) -> list[tuple[str, bytes]]:
    out = []
    for a in archives:
        out.append((a.name, a.data) if isinstance(a, Archive) else (str(a[0]), bytes(a[1])))
    return out


def deposit(
    session: DepositSession,
    metadata: Mapping,
    archives: Iterable[Archive | tuple[str, bytes]],
    *,
    token: str | None = None,
    client: httpx.Client | None = None,
    retries: int = 2,
    backoff: float = 0.05,
    timeout: float = 30.0,
) -> DepositSession:
    """Create the deposition, upload every archive, then publish.

    Resumes from ``session.state``; a failure raises the mapped error with the
    furthest session reached attached as ``exc.session``. The token comes from
    ``token`` or the environment variable named by ``session.token_env``.
    """
    files = _archives(archives)
    if token is None:
        token = os.environ.get(session.token_env)
    own = client is None
    http = client or httpx.Client(timeout=timeout)
    t = _Transport(http, token, retries, backoff)
    endpoint = session.endpoint.rstrip("/")
    current = session
    try:
        if current.state is DepositState.NEW:
            # creation is not idempotent, so it is never retried
            resp = t.request("POST", f"{endpoint}/deposit/depositions", retry=False, json={"metadata": dict(metadata)})
            body = _json(resp, (200, 201), "create deposition")
            dep_id = body.get("id")
            bucket = body.get("bucket") or (body.get("links") or {}).get("bucket")
            if dep_id is None or not bucket:
                raise ProtocolError("create deposition: response lacks id or bucket")
            current = current.advance(DepositState.CREATED, deposition_id=str(dep_id), bucket=str(bucket))

        if current.state is DepositState.CREATED:
            for name, data in files:
                if name in current.uploaded:
                    continue
                resp = t.request("PUT", f"{current.bucket.rstrip('/')}/{name}", retry=True, content=data)
                body = _json(resp, (200, 201), f"upload {name}")
                reported = str(body.get("checksum", ""))
                expected = sha256_hex(data)
                if reported.removeprefix("sha256:").lower() != expected:
                    raise DigestMismatch(f"upload {name}: server reports {reported!r}, expected sha256:{expected}")
                current = replace(current, uploaded=current.uploaded + (name,))
            current = current.advance(DepositState.FILES_UPLOADED)

        if current.state is DepositState.FILES_UPLOADED:
            url = f"{endpoint}/deposit/depositions/{current.deposition_id}/actions/publish"
            body = _json(t.request("POST", url, retry=True), (200, 202), "publish")
            doi = body.get("doi")
            if not doi:
                raise ProtocolError("publish: response lacks a DOI")
            try:
                doi = validate_doi(str(doi))
            except Exception as exc:
                raise ProtocolError(f"publish: invalid DOI {doi!r}") from exc
            current = current.advance(DepositState.PUBLISHED, doi=doi)
    except (AuthError, ProtocolError, DigestMismatch) as exc:
        exc.session = current  # type: ignore[attr-defined]
        raise
    finally:
        if own:
            http.close()
    return current


def _dataset_node(doc: LinkedDocument):
    if doc.base and doc.base in doc.nodes:
        return doc.nodes[doc.base]
    found = sorted(doc.of_type(DCAT.Dataset), key=lambda n: n.id)
    if not found:
        raise ValueError("document has no dataset node")
    return found[0]


def attach_doi(doc: LinkedDocument, doi: str) -> LinkedDocument:
    """Copy of ``doc`` whose dataset node carries the DOI as ``dcterms:identifier``."""
    value = doi_identifier(doi)
    out = doc.copy()
    node = _dataset_node(out)
    present = node.get(DCTERMS.identifier)
    if value in present:
        return out
    if present:
        raise ConflictingFunctionalValue(node.id, DCTERMS.identifier, [*present, value])
    node.add(DCTERMS.identifier, value)
    return out


def add_distribution(doc: LinkedDocument, name: str, archive: Archive) -> LinkedDocument:
    """Copy of ``doc`` with a distribution node describing one produced archive."""
    out = doc.copy()
    ds = _dataset_node(out)
    iri = ds.id.rstrip("/") + "/distributions/" + name
    node = out.node(iri, DCAT.Distribution)
    for pred, value in (
        (DCTERMS.title, Literal(name)),
        (DCAT.mediaType, Literal(MEDIA_TYPE)),
        (ROBOVAST.name, Literal(archive.name)),
        (DCAT.byteSize, Literal.of(archive.manifest.archive_size)),
        (ROBOVAST.sha256, Literal(archive.manifest.archive_digest)),
    ):
        # a re-packaged archive supersedes the previous description
        node.remove(pred)
        node.add(pred, value)
    if iri not in ds.get(DCAT.distribution):
        ds.add(DCAT.distribution, iri)
    return out
