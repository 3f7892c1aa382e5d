"""Deterministic ZIP packaging of dataset files into declared distributions."""

from __future__ import annotations

import hashlib
import io
import json
import re
import zipfile
from dataclasses import dataclass
from datetime import datetime, timezone
from fnmatch import fnmatchcase
from pathlib import Path
from typing import Callable, Union

from ..capture import DistributionSpec
from ..errors import EmptySelection, TemplateError

# ZIP cannot store dates before 1980, so every entry gets the format's epoch
ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
MEDIA_TYPE = "application/zip"

_PLACEHOLDER = re.compile(r"\{([^{}]*)\}")
_DIRECTIVE = re.compile(r"%(.?)", re.S)
_ALLOWED = set("YmdHMS%")

Clock = Union[datetime, Callable[[], datetime]]


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    size: int
    digest: str


@dataclass(frozen=True)
class PackageManifest:
    archive: str
    entries: tuple[ManifestEntry, ...]
    archive_size: int
    archive_digest: str

    @property
    def total_size(self) -> int:
        return sum(e.size for e in self.entries)

    def as_dict(self) -> dict:
        return {
            "archive": self.archive,
            "archive_digest": self.archive_digest,
            "archive_size": self.archive_size,
            "entries": [{"path": e.path, "size": e.size, "digest": e.digest} for e in self.entries],
            "total_size": self.total_size,
        }

    def to_json(self) -> bytes:
        return (json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n").encode()

    @classmethod
    def from_json(cls, data: bytes | str) -> "PackageManifest":
        raw = json.loads(data)
        entries = tuple(ManifestEntry(e["path"], int(e["size"]), e["digest"]) for e in raw["entries"])
        return cls(raw["archive"], entries, int(raw["archive_size"]), raw["archive_digest"])


@dataclass(frozen=True)
class Archive:
    name: str
    data: bytes
    manifest: PackageManifest

    def write(self, out_dir: str | Path) -> Path:
        """Write the archive and its ``<archive>.manifest.json`` sidecar."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / self.name
        path.write_bytes(self.data)
        (out / f"{self.name}.manifest.json").write_bytes(self.manifest.to_json())
        return path


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _now(clock: Clock) -> datetime:
    return clock() if callable(clock) else clock


def render_filename(template: str, clock: Clock) -> str:
    """Substitute ``{timestamp:<fmt>}`` placeholders using a strftime subset."""
    when = _now(clock)
    if when.tzinfo is not None:
        when = when.astimezone(timezone.utc)

    def sub(m: re.Match) -> str:
        name, sep, fmt = m.group(1).partition(":")
        if name != "timestamp" or not sep or not fmt:
            raise TemplateError(f"unsupported placeholder {{{m.group(1)}}} in {template!r}")
        for d in _DIRECTIVE.findall(fmt):
            if d not in _ALLOWED:
                raise TemplateError(f"unsupported directive %{d} in {template!r}")
        return when.strftime(fmt)

    name = _PLACEHOLDER.sub(sub, template)
    if "{" in name or "}" in name:
        raise TemplateError(f"unbalanced braces in {template!r}")
    if not name or "/" in name or "\\" in name or name in (".", ".."):
        raise TemplateError(f"template {template!r} does not yield a plain file name")
    return name


def select_files(dataset_dir: str | Path, globs: tuple[str, ...] | list[str]) -> list[str]:
    """Relative POSIX paths of regular files matching any glob, sorted."""
    root = Path(dataset_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {root}")
    out = []
    for path in root.rglob("*"):
        if path.is_symlink() or not path.is_file():
            continue
        rel = path.relative_to(root).as_posix()
        if any(fnmatchcase(rel, g) for g in globs):
            out.append(rel)
    return sorted(out)


def build_zip(files: list[tuple[str, bytes]]) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for rel, data in sorted(files):
            info = zipfile.ZipInfo(rel, date_time=ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.create_system = 3
            info.external_attr = 0o100644 << 16
            zf.writestr(info, data, compresslevel=9)
    return buf.getvalue()


def package(dataset_dir: str | Path, spec: DistributionSpec, clock: Clock) -> Archive:
    """Archive the files of ``dataset_dir`` selected by ``spec``; identical inputs give identical bytes."""
    name = render_filename(spec.filename_template, clock)
    root = Path(dataset_dir)
    selected = select_files(root, spec.include_filter)
    if not selected:
        raise EmptySelection(f"no file under {root} matches {list(spec.include_filter)}")
    files = [(rel, (root / rel).read_bytes()) for rel in selected]
    data = build_zip(files)
    entries = tuple(ManifestEntry(rel, len(body), sha256_hex(body)) for rel, body in files)
    return Archive(name, data, PackageManifest(name, entries, len(data), sha256_hex(data)))


def verify_archive(data: bytes, manifest: PackageManifest) -> list[str]:
    """Entries whose content does not match the manifest; empty when intact."""
    problems = []
    if sha256_hex(data) != manifest.archive_digest:
        problems.append(manifest.archive)
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        names = zf.namelist()
        expected = {e.path: e for e in manifest.entries}
        for rel in sorted(set(names) | set(expected)):
            e = expected.get(rel)
            if e is None or rel not in names:
                problems.append(rel)
                continue
            body = zf.read(rel)
            if len(body) != e.size or sha256_hex(body) != e.digest:
                problems.append(rel)
    return problems
