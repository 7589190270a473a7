"""Stateless HTTP wrapper around verification.

POST /verify with a JSON body naming the same files as the CLI flags::

    {"vk": "...", "comm": "...", "bundle": "...", "input": "...", "output": "..."}

Response: ``{"verdict": "Yes" | "No", "ok": bool, "reason": str}`` with
HTTP 200, or ``{"error": str}`` with 400 for a bad request.
"""
from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .cli import verify_files

REQUIRED = ("vk", "comm", "bundle", "input", "output")


def handle_verify(body: dict) -> tuple[int, dict]:
    if not isinstance(body, dict):
        return 400, {"error": "body must be a JSON object"}
    missing = [k for k in REQUIRED if not isinstance(body.get(k), str)]
    if missing:
        return 400, {"error": f"missing fields: {', '.join(missing)}"}
    try:
        verdict = verify_files(*(body[k] for k in REQUIRED))
    except (OSError, ValueError) as exc:
        return 400, {"error": str(exc)}
    return 200, {"verdict": "Yes" if verdict else "No", "ok": verdict.ok, "reason": verdict.reason}


class VerifyHandler(BaseHTTPRequestHandler):
    def _send(self, status: int, payload: dict):
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_POST(self):
        if self.path != "/verify":
            self._send(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        try:
            body = json.loads(self.rfile.read(length) or b"null")
        except json.JSONDecodeError as exc:
            self._send(400, {"error": f"invalid JSON: {exc}"})
            return
        self._send(*handle_verify(body))

    def log_message(self, fmt, *args):
        pass


def make_server(host: str = "127.0.0.1", port: int = 8650) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), VerifyHandler)


def serve(host: str = "127.0.0.1", port: int = 8650):
    server = make_server(host, port)
    print(f"verify service on http://{host}:{server.server_address[1]}/verify")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
