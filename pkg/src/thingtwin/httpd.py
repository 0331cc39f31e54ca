"""Stdlib HTTP front end for :class:`~thingtwin.service.TwinService`.

Thin by design: parses the URL and JSON body, delegates to
``TwinService.handle_request``, writes the JSON response. Serves permissive
CORS headers so a browser dashboard on another origin can call it.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qsl, unquote, urlsplit

from .service import TwinService

__all__ = ["make_server", "serve_forever"]

_CORS = {
    "Access-Control-Allow-Origin": "*",
    "Access-Control-Allow-Methods": "GET, POST, PUT, DELETE, OPTIONS",
    "Access-Control-Allow-Headers": "Content-Type",
}


def _make_handler(service: TwinService, quiet: bool):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # noqa: N802 (stdlib name)
            if not quiet:
                super().log_message(fmt, *args)

        def _reply(self, status: int, payload) -> None:
            data = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            for key, value in _CORS.items():
                self.send_header(key, value)
            self.end_headers()
            self.wfile.write(data)

        def _dispatch(self, method: str) -> None:
            parts = urlsplit(self.path)
            path = unquote(parts.path)
            query = dict(parse_qsl(parts.query))
            body = None
            length = int(self.headers.get("Content-Length") or 0)
            if length:
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw.decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError):
                    self._reply(400, {"error": "BadJson",
                                      "message": "request body is not JSON"})
                    return
            status, payload = service.handle_request(method, path, body, query)
            self._reply(status, payload)

        def do_GET(self):  # noqa: N802
            self._dispatch("GET")

        def do_POST(self):  # noqa: N802
            self._dispatch("POST")

        def do_PUT(self):  # noqa: N802
            self._dispatch("PUT")

        def do_DELETE(self):  # noqa: N802
            self._dispatch("DELETE")

        def do_OPTIONS(self):  # noqa: N802
            self.send_response(204)
            for key, value in _CORS.items():
                self.send_header(key, value)
            self.send_header("Content-Length", "0")
            self.end_headers()

    return Handler


def make_server(service: TwinService, host: str = "127.0.0.1",
                port: int = 0, quiet: bool = True) -> ThreadingHTTPServer:
    """Build a threading HTTP server bound to ``host:port`` (0 = ephemeral)."""
    return ThreadingHTTPServer((host, port), _make_handler(service, quiet))


def serve_forever(service: TwinService, host: str, port: int,
                  quiet: bool = False) -> None:
    server = make_server(service, host, port, quiet)
    try:
        server.serve_forever()
    finally:
        server.server_close()
