"""Loopback HTTP server speaking the deposit protocol, for tests and demos."""

from __future__ import annotations

import hashlib
import json
import threading
from collections import defaultdict, deque
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlsplit

DEFAULT_DOI = "10.5281/zenodo.18702398"


@dataclass(frozen=True)
class Call:
    method: str
    path: str
    stage: str
    status: int


class MockRepository:
    """In-memory deposition service.

    ``inject(stage, status)`` makes the next request of ``stage`` ("create",
    "upload" or "publish") answer with ``status`` instead of the normal reply.
    ``corrupt_checksums`` makes uploads report a wrong digest.
    """

    def __init__(self, *, doi: str = DEFAULT_DOI, token: str | None = None) -> None:
        self.doi = doi
        self.token = token
        self.corrupt_checksums = False
        self.calls: list[Call] = []
        self.depositions: dict[str, dict] = {}
        self._faults: dict[str, deque[int]] = defaultdict(deque)
        self._lock = threading.Lock()
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), self._handler())
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def inject(self, stage: str, status: int, times: int = 1) -> None:
        with self._lock:
            self._faults[stage].extend([status] * times)

    def start(self) -> "MockRepository":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "MockRepository":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def stages(self) -> list[str]:
        return [c.stage for c in self.calls]

    def _handler(self):
        repo = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args) -> None:
                pass

            def _reply(self, stage: str, status: int, body: dict | None = None) -> None:
                with repo._lock:
                    repo.calls.append(Call(self.command, urlsplit(self.path).path, stage, status))
                payload = json.dumps(body or {}).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def _body(self) -> bytes:
                n = int(self.headers.get("Content-Length") or 0)
                return self.rfile.read(n) if n else b""

            def _gate(self, stage: str) -> bool:
                """Apply auth and injected faults; True when a reply was already sent."""
                with repo._lock:
                    fault = repo._faults[stage].popleft() if repo._faults[stage] else None
                if fault is not None:
                    self._reply(stage, fault, {"message": "injected failure"})
                    return True
                if repo.token is not None and self.headers.get("Authorization") != f"Bearer {repo.token}":
                    self._reply(stage, 401, {"message": "bad token"})
                    return True
                return False

            def do_POST(self) -> None:
                parts = urlsplit(self.path).path.strip("/").split("/")
                raw = self._body()
                if parts == ["deposit", "depositions"]:
                    if self._gate("create"):
                        return
                    try:
                        meta = json.loads(raw or b"{}").get("metadata", {})
                    except ValueError:
                        self._reply("create", 400, {"message": "invalid JSON"})
                        return
                    with repo._lock:
                        dep_id = str(len(repo.depositions) + 1)
                        repo.depositions[dep_id] = {"metadata": meta, "files": {}, "doi": None}
                    self._reply("create", 201, {"id": dep_id, "bucket": f"{repo.url}/files/{dep_id}"})
                    return
                if len(parts) == 5 and parts[:2] == ["deposit", "depositions"] and parts[3:] == ["actions", "publish"]:
                    if self._gate("publish"):
                        return
                    dep = repo.depositions.get(parts[2])
                    if dep is None:
                        self._reply("publish", 404, {"message": "no such deposition"})
                        return
                    if not dep["files"]:
                        self._reply("publish", 400, {"message": "nothing uploaded"})
                        return
                    dep["doi"] = repo.doi
                    self._reply("publish", 202, {"id": parts[2], "doi": repo.doi})
                    return
                self._reply("unknown", 404, {"message": "not found"})

            def do_PUT(self) -> None:
                parts = urlsplit(self.path).path.strip("/").split("/")
                data = self._body()
                if len(parts) == 3 and parts[0] == "files":
                    if self._gate("upload"):
                        return
                    dep = repo.depositions.get(parts[1])
                    if dep is None or dep["doi"] is not None:
                        self._reply("upload", 404, {"message": "no open deposition"})
                        return
                    digest = hashlib.sha256(data).hexdigest()
                    if repo.corrupt_checksums:
                        digest = "0" * 64
                    dep["files"][parts[2]] = data
                    self._reply("upload", 201, {"key": parts[2], "size": len(data), "checksum": f"sha256:{digest}"})
                    return
                self._reply("unknown", 404, {"message": "not found"})

        return Handler
