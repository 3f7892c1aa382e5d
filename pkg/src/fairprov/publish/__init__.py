"""Deterministic distribution packaging and repository deposit."""

from .deposit import (
    DEFAULT_TOKEN_ENV,
    DepositSession,
    DepositState,
    add_distribution,
    attach_doi,
    deposit,
    deposit_metadata,
)
from .packaging import (
    Archive,
    ManifestEntry,
    PackageManifest,
    package,
    render_filename,
    select_files,
    verify_archive,
)

__all__ = [
    "DEFAULT_TOKEN_ENV",
    "Archive",
    "DepositSession",
    "DepositState",
    "ManifestEntry",
    "PackageManifest",
    "add_distribution",
    "attach_doi",
    "deposit",
    "deposit_metadata",
    "package",
    "render_filename",
    "select_files",
    "verify_archive",
]
