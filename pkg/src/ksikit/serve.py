"""Local HTTP service hosting the browser runner and collecting uploads.

Endpoints:
  GET  /plan?device=mouse&seed=7&blocks=8   -> trial plan as JSONL
  POST /session  (body: .ksi.jsonl)         -> validate and persist
Static files (the web runner) are served from a configurable directory.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import events as ev
from .errors import KsiError, LogOrderError
from .experiment import encode_plan, make_plan

_MIME = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
}


class KsiServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, data_dir, static_dir=None, plan_defaults=None):
        super().__init__(address, _Handler)
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.static_dir = Path(static_dir) if static_dir else None
        self.plan_defaults = dict(plan_defaults or {})
        self._lock = threading.Lock()
        self._counter = 0

    def next_upload_path(self, participant: str) -> Path:
        with self._lock:
            self._counter += 1
            stamp = time.strftime("%Y%m%d-%H%M%S")
            safe = "".join(c for c in participant if c.isalnum() or c in "-_") or "anon"
            return self.data_dir / f"{stamp}_{safe}_{self._counter:04d}.ksi.jsonl"


class _Handler(BaseHTTPRequestHandler):
    server: KsiServer

    def log_message(self, fmt, *args):  # quiet by default; tests parse stdout
        pass

    def _send(self, code: int, body: bytes, content_type: str = "application/json"):
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, code: int, obj):
        self._send(code, json.dumps(obj).encode("utf-8"))

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/plan":
            self._handle_plan(parse_qs(url.query))
            return
        if url.path == "/healthz":
            self._send_json(200, {"ok": True})
            return
        self._handle_static(url.path)

    def _handle_plan(self, query):
        defaults = self.server.plan_defaults
        device = query.get("device", [defaults.get("device", "mouse")])[0]
        try:
            seed = int(query.get("seed", [defaults.get("seed", 0)])[0])
            blocks = int(query.get("blocks", [defaults.get("blocks", 8)])[0])
            ids = tuple(int(i) for i in defaults.get("ids", (3, 4, 5)))
            plan = make_plan(device, ids=ids, blocks=blocks, seed=seed)
        except (ValueError, KsiError) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        body = ("\n".join(encode_plan(plan)) + "\n").encode("utf-8")
        self._send(200, body, "application/x-ndjson")

    def _handle_static(self, path: str):
        root = self.server.static_dir
        if root is None:
            self._send_json(404, {"error": "no static directory configured"})
            return
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._send_json(404, {"error": f"not found: {path}"})
            return
        body = target.read_bytes()
        self._send(200, body, _MIME.get(target.suffix, "application/octet-stream"))

    def do_POST(self):
        url = urlparse(self.path)
        if url.path != "/session":
            self._send_json(404, {"error": f"not found: {url.path}"})
            return
        length = int(self.headers.get("Content-Length", 0))
        if length <= 0:
            self._send_json(400, {"error": "empty body"})
            return
        raw = self.rfile.read(length)
        try:
            text = raw.decode("utf-8")
            log = ev.decode_session(text.splitlines())
        except LogOrderError as exc:
            self._send_json(
                422,
                {
                    "error": "session failed validation",
                    "violations": [
                        {"rule": "non_monotone_timestamps", "index": exc.index, "message": str(exc)}
                    ],
                },
            )
            return
        except (UnicodeDecodeError, KsiError) as exc:
            self._send_json(400, {"error": f"unparseable session: {exc}"})
            return
        violations = ev.validate_session(log)
        if violations:
            self._send_json(
                422,
                {
                    "error": "session failed validation",
                    "violations": [
                        {"rule": v.rule, "index": v.index, "message": v.message}
                        for v in violations
                    ],
                },
            )
            return
        path = self.server.next_upload_path(log.meta.participant_id)
        path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        self._send_json(200, {"stored": path.name, "violations": []})


def serve(port: int, data_dir, static_dir=None, plan_defaults=None, host: str = "127.0.0.1"):
    """Blocking server loop; returns the server object when used programmatically."""
    server = KsiServer((host, port), data_dir, static_dir, plan_defaults)
    return server
