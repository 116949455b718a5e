"""JSON-over-HTTP service mirroring the CLI commands 1:1.

GET /solve, /curve, /tables and POST /simulate accept the same fields as the
corresponding commands and return identical bodies. Handlers are stateless;
requests are served concurrently by a threading server. Cross-origin headers
are permissive so a locally served explorer UI can call the endpoints.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qsl, urlparse

from .cli import (
    MAX_SERVICE_REPS,
    CurveRequest,
    SimulateRequest,
    SolveRequest,
    TablesRequest,
    handle_curve,
    handle_solve,
    handle_tables,
    render,
    render_json,
    summary_to_dict,
)
from .model import SolverError, ValidationError
from .simulate import iter_simulation

__all__ = ["PlatformService", "serve"]


class _Handler(BaseHTTPRequestHandler):
    server_version = "platalloc"
    protocol_version = "HTTP/1.1"

    # -- plumbing -----------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default; tests parse stdout
        if self.server.verbose:
            super().log_message(fmt, *args)

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _reply(self, status: int, body: str, content_type: str = "application/json"):
        data = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", f"{content_type}; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self._cors()
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, kind: str, message: str):
        self._reply(status, render_json({"error": {"type": kind, "message": message}}))

    def _query(self) -> dict:
        return dict(parse_qsl(urlparse(self.path).query))

    def _route(self) -> str:
        return urlparse(self.path).path

    # -- methods --------------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        route = self._route()
        query = self._query()
        fmt = query.pop("format", "json")
        try:
            if route == "/solve":
                body = render("solve", handle_solve(SolveRequest.from_mapping(query)), fmt)
            elif route == "/curve":
                body = render("curve", handle_curve(CurveRequest.from_mapping(query)), fmt)
            elif route == "/tables":
                body = render("tables", handle_tables(TablesRequest.from_mapping(query)), fmt)
            else:
                return self._serve_static(route)
        except ValidationError as err:
            return self._error(400, "validation", str(err))
        except SolverError as err:
            return self._error(422, "solver", str(err))
        ctype = "text/csv" if fmt == "csv" else "application/json"
        self._reply(200, body, ctype)

    def do_POST(self):
        route = self._route()
        if route != "/simulate":
            return self._error(404, "not_found", f"no endpoint {route}")
        query = self._query()
        try:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            mapping = dict(query)
            if raw:
                try:
                    body_map = json.loads(raw)
                except json.JSONDecodeError as err:
                    raise ValidationError(f"malformed JSON body: {err}") from err
                if not isinstance(body_map, dict):
                    raise ValidationError("simulate body must be a JSON object")
                mapping.update(body_map)
            stream = str(mapping.pop("stream", "")).lower() in ("1", "true", "yes")
            request = SimulateRequest.from_mapping(mapping)
            if request.reps > MAX_SERVICE_REPS:
                raise ValidationError(
                    f"reps capped at {MAX_SERVICE_REPS} per service request, got {request.reps}")
        except ValidationError as err:
            return self._error(400, "validation", str(err))
        except SolverError as err:
            return self._error(422, "solver", str(err))

        if stream:
            return self._stream_simulation(request)
        from .cli import handle_simulate  # runs the simulation synchronously
        try:
            body = render_json(handle_simulate(request))
        except ValidationError as err:
            return self._error(400, "validation", str(err))
        self._reply(200, body)

    # -- simulate streaming ---------------------------------------------------

    def _stream_simulation(self, request: SimulateRequest):
        """Chunked NDJSON: progress lines, then one result line."""
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson; charset=utf-8")
        self.send_header("Transfer-Encoding", "chunked")
        self._cors()
        self.end_headers()

        def chunk(obj) -> None:
            line = (json.dumps(obj) + "\n").encode("utf-8")
            self.wfile.write(f"{len(line):X}\r\n".encode("ascii") + line + b"\r\n")

        batch = max(1, min(request.reps // 20 or 1, 8192))
        for event in iter_simulation(request.scenario, request.reps, request.seed,
                                     batch_size=batch):
            if event[0] == "progress":
                chunk({"type": "progress", "done": event[1], "total": event[2]})
            else:
                chunk({"type": "result", "summary": summary_to_dict(event[1]),
                       "seed": request.seed, "reps": request.reps})
        self.wfile.write(b"0\r\n\r\n")

    # -- static assets ----------------------------------------------------------

    def _serve_static(self, route: str):
        root = self.server.ui_dir
        if root is None:
            return self._error(404, "not_found", f"no endpoint {route}")
        rel = route.lstrip("/") or "index.html"
        path = (root / rel).resolve()
        if not str(path).startswith(str(root.resolve())) or not path.is_file():
            return self._error(404, "not_found", f"no asset {route}")
        ctype = mimetypes.guess_type(str(path))[0] or "application/octet-stream"
        data = path.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self._cors()
        self.end_headers()
        self.wfile.write(data)


class PlatformService:
    """Embeddable threading HTTP server; use .start() / .stop() in tests."""

    def __init__(self, host: str = "127.0.0.1", port: int = 8645,
                 ui_dir: str | None = None, verbose: bool = False):
        self.httpd = ThreadingHTTPServer((host, port), _Handler)
        self.httpd.ui_dir = Path(ui_dir) if ui_dir else None
        self.httpd.verbose = verbose
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def start(self) -> "PlatformService":
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        self.httpd.serve_forever()


def serve(host: str = "127.0.0.1", port: int = 8645, ui_dir: str | None = None) -> None:
    service = PlatformService(host=host, port=port, ui_dir=ui_dir, verbose=True)
    where = f"http://{host}:{service.port}"
    print(f"platalloc service listening on {where} "
          f"(endpoints: /solve /curve /tables /simulate)")
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        service.stop()
