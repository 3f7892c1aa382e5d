"""Command-line entry point.

Exit codes: 0 on success, 1 when a check fails or the pipeline reports an
error, 2 on usage errors. Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import faircheck, harness, ldgraph, publish
from .capture import MANIFEST_NAME, parse_manifest
from .consolidate import consolidate_tree, stats, validate_graph
from .errors import FairProvError
from .query import FORMATS, bundled_query, query, render

log = logging.getLogger("fairprov")

PROVENANCE_FILE = "provenance.jsonld"
SESSION_FILE = "deposit-session.json"
PROFILES = {
    "demo": harness.demo_profile,
    "default": harness.default_profile,
    "paper": harness.paper_profile,
}


class UsageError(Exception):
    pass


def _path(args: argparse.Namespace, value: str | None) -> Path:
    p = Path(value) if value else Path(".")
    return p if p.is_absolute() else Path(args.root) / p


def _emit(text: str | bytes, output: Path | None = None) -> None:
    data = text.encode() if isinstance(text, str) else text
    if output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        output.write_bytes(data)


def _load_graph(path: Path) -> ldgraph.LinkedDocument:
    if path.is_dir():
        path = path / PROVENANCE_FILE
    if not path.is_file():
        raise UsageError(f"no such graph file: {path}")
    return ldgraph.parse(path.read_bytes())


def _clock(value: str | None) -> datetime:
    if value:
        return ldgraph.parse_datetime(value) if "T" in value else datetime.fromisoformat(value)
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return datetime.fromtimestamp(int(epoch), timezone.utc)
    return datetime.now(timezone.utc)


def cmd_demo(args: argparse.Namespace) -> int:
    cfg = PROFILES[args.profile](args.seed)
    out = _path(args, args.out)
    summary = harness.generate(cfg, out, workers=args.workers)
    _emit(json.dumps(summary.as_dict(), sort_keys=True) + "\n")
    return 0


def cmd_consolidate(args: argparse.Namespace) -> int:
    root = _path(args, args.dataset)
    if not (root / MANIFEST_NAME).is_file():
        raise UsageError(f"no {MANIFEST_NAME} in {root}")
    doc, scan = consolidate_tree(root, workers=args.workers)
    for v in scan.violations:
        print(f"layout: {v}", file=sys.stderr)
    target = _path(args, args.output) if args.output else root / PROVENANCE_FILE
    target.write_bytes(ldgraph.serialize(doc))
    report = validate_graph(doc)
    for v in report.violations:
        print(f"violation: [{v.rule}] {v.node}: {v.message}", file=sys.stderr)
    _emit(_stats_text(report, args.format))
    return 1 if report.violations or scan.violations else 0


def _stats_text(report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"
    lines = [f"nodes\t{report.node_total}", f"triples\t{report.triple_count}"]
    lines += [f"{k}\t{v}" for k, v in report.node_counts.items()]
    lines.append(f"violations\t{len(report.violations)}")
    return "\n".join(lines) + "\n"


def cmd_stats(args: argparse.Namespace) -> int:
    doc = _load_graph(_path(args, args.graph))
    report = validate_graph(doc) if args.validate else stats(doc)
    _emit(_stats_text(report, args.format))
    return 1 if report.violations else 0


def cmd_query(args: argparse.Namespace) -> int:
    doc = _load_graph(_path(args, args.graph))
    qpath = _path(args, args.query)
    if qpath.is_file():
        text = qpath.read_text(encoding="utf-8")
    else:
        try:
            text = bundled_query(Path(args.query).name)
        except FileNotFoundError:
            raise UsageError(f"no such query file or bundled query: {args.query}") from None
    _emit(render(query(doc, text), args.format))
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    gpath = _path(args, args.graph)
    doc = _load_graph(gpath)
    dataset = _path(args, args.dataset) if args.dataset else (gpath if gpath.is_dir() else gpath.parent)
    report = faircheck.check(doc, dataset)
    color = args.format == "text" and args.output is None and sys.stdout.isatty()
    out = _path(args, args.output) if args.output else None
    _emit(faircheck.render_report(report, args.format, color=color), out)
    return 1 if report.failed else 0


def _package_all(args: argparse.Namespace, root: Path) -> list[tuple[str, publish.Archive]]:
    manifest = parse_manifest((root / MANIFEST_NAME).read_bytes())
    if not manifest.publication:
        raise UsageError("the campaign manifest declares no publication distributions")
    when = _clock(args.timestamp)
    out = _path(args, args.out)
    built = []
    for spec in manifest.publication:
        archive = publish.package(root, spec, when)
        archive.write(out)
        print(f"packaged {archive.name}: {len(archive.manifest.entries)} files", file=sys.stderr)
        built.append((spec.name, archive))
    return built


def cmd_package(args: argparse.Namespace) -> int:
    root = _path(args, args.dataset)
    built = _package_all(args, root)
    listing = {a.name: a.manifest.as_dict() for _, a in built}
    _emit(json.dumps(listing, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_publish(args: argparse.Namespace) -> int:
    root = _path(args, args.dataset)
    graph_path = root / PROVENANCE_FILE
    doc = _load_graph(graph_path)
    out = _path(args, args.out)
    session_path = out / SESSION_FILE
    session = publish.DepositSession(args.endpoint, args.token_env)
    if session_path.is_file():
        session = _read_session(session_path, session)
        if session.state is publish.DepositState.PUBLISHED:
            print(f"already published as {session.doi}", file=sys.stderr)
            _emit(session.doi + "\n")
            return 0
    built = _package_all(args, root)
    manifest = parse_manifest((root / MANIFEST_NAME).read_bytes())
    try:
        session = publish.deposit(session, publish.deposit_metadata(manifest), [a for _, a in built])
    except FairProvError as exc:
        _write_session(session_path, getattr(exc, "session", session))
        raise
    _write_session(session_path, session)
    for name, archive in built:
        doc = publish.add_distribution(doc, name, archive)
    doc = publish.attach_doi(doc, session.doi)
    graph_path.write_bytes(ldgraph.serialize(doc))
    _emit(session.doi + "\n")
    return 0


def _write_session(path: Path, session: publish.DepositSession) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    data = {
        "endpoint": session.endpoint,
        "token_env": session.token_env,
        "deposition_id": session.deposition_id,
        "bucket": session.bucket,
        "state": session.state.label,
        "uploaded": list(session.uploaded),
        "doi": session.doi,
    }
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _read_session(path: Path, fresh: publish.DepositSession) -> publish.DepositSession:
    raw = json.loads(path.read_text(encoding="utf-8"))
    if raw.get("endpoint") != fresh.endpoint:
        return fresh
    state = publish.DepositState[raw["state"].upper().replace("-", "_")]
    return publish.DepositSession(
        fresh.endpoint,
        fresh.token_env,
        raw.get("deposition_id"),
        raw.get("bucket"),
        state,
        tuple(raw.get("uploaded") or ()),
        raw.get("doi"),
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fairprov", description="Provenance graphs and FAIR publication for test campaigns.")
    p.add_argument("--root", default=".", help="directory relative paths are resolved against")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("demo", help="generate a synthetic campaign results tree")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--out", required=True)
    s.add_argument("--profile", choices=sorted(PROFILES), default="demo")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_demo)

    s = sub.add_parser("consolidate", help="capture a results tree and write provenance.jsonld")
    s.add_argument("dataset", nargs="?", default=".")
    s.add_argument("--output", help="graph file (default: <dataset>/provenance.jsonld)")
    s.add_argument("--format", choices=("table", "json"), default="table")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_consolidate)

    s = sub.add_parser("stats", help="node and triple counts of a graph")
    s.add_argument("graph")
    s.add_argument("--format", choices=("table", "json"), default="table")
    s.add_argument("--validate", action="store_true", help="also run structural validation")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("query", help="evaluate a query file against a graph")
    s.add_argument("graph")
    s.add_argument("query", help=".rq file or the name of a bundled query")
    s.add_argument("--format", choices=FORMATS, default="csv")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("check", help="FAIR compliance report")
    s.add_argument("graph")
    s.add_argument("--dataset", help="results tree the graph describes (default: the graph's directory)")
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--output")
    s.set_defaults(func=cmd_check)

    for name, func, text in (
        ("package", cmd_package, "build the declared distribution archives"),
        ("publish", cmd_publish, "package, deposit and record the DOI"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("dataset", nargs="?", default=".")
        s.add_argument("--out", default="dist")
        s.add_argument("--timestamp", help="clock for file name templates (ISO date or date-time)")
        if name == "publish":
            s.add_argument("--endpoint", required=True)
            s.add_argument("--token-env", default=publish.DEFAULT_TOKEN_ENV)
        s.set_defaults(func=func)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fairprov: usage error: {exc}", file=sys.stderr)
        return 2
    except (FairProvError, OSError, ValueError) as exc:
        print(f"fairprov: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
