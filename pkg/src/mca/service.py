"""Local HTTP API for the explorer UI: datasets, grids, windows, sessions.

Datasets are immutable once uploaded; what-if exclusion of observations is
modeled as sessions holding an excluded-index set, applied as the active row
set of every analysis.  Session updates are atomic: concurrent readers see
either the old or the new exclusion set.  The store is in-memory only and
the server binds to loopback by default.

Endpoints (JSON unless noted; docs/api.md carries the full description):

    GET    /datasets
    POST   /datasets                     text/csv body
    GET    /datasets/{id}
    GET    /datasets/{id}/mca            ?sort&x&y&r[&method&p&min_n&session]
    GET    /datasets/{id}/mca.svg        same parameters, image/svg+xml
    GET    /datasets/{id}/subpopulation  ?sort&alpha&beta[&session]
    GET    /datasets/{id}/scatter        ?x&y[&session]
    POST   /datasets/{id}/sessions       {"excluded": [indices]}
    GET    /datasets/{id}/sessions/{sid}
    PATCH  /datasets/{id}/sessions/{sid} {"excluded": [indices]}
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .data import CsvFormatError, DataMatrix, load_csv, round12
from .engine import build_grid, cell_to_dict, resolve_window
from .render import RenderOptions, render_mca

__all__ = ["create_server", "AnalysisServer", "DEFAULT_MAX_UPLOAD"]

DEFAULT_MAX_UPLOAD = 64 * 2**20  # bytes


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class Session:
    session_id: str
    dataset_id: str
    excluded: frozenset[int]
    created_at: float


class Store:
    """Thread-safe in-memory registry of datasets and sessions."""

    def __init__(self):
        self._lock = threading.Lock()
        self._datasets: dict[str, DataMatrix] = {}
        self._sessions: dict[str, Session] = {}
        self._counter = 0

    def _next_id(self, prefix: str) -> str:
        self._counter += 1
        return f"{prefix}{self._counter}"

    def add_dataset(self, matrix: DataMatrix) -> str:
        with self._lock:
            dataset_id = self._next_id("d")
            self._datasets[dataset_id] = matrix
            return dataset_id

    def list_datasets(self) -> list[tuple[str, DataMatrix]]:
        with self._lock:
            return sorted(self._datasets.items())

    def dataset(self, dataset_id: str) -> DataMatrix:
        with self._lock:
            try:
                return self._datasets[dataset_id]
            except KeyError:
                raise ApiError(404, f"unknown dataset {dataset_id!r}") from None

    def _check_excluded(self, matrix: DataMatrix, excluded) -> frozenset[int]:
        try:
            idx = frozenset(int(i) for i in excluded)
        except (TypeError, ValueError):
            raise ApiError(422, "excluded must be a list of integers") from None
        bad = [i for i in idx if i < 0 or i >= matrix.n_observations]
        if bad:
            raise ApiError(422, f"excluded indices out of range: {sorted(bad)}")
        if len(idx) >= matrix.n_observations:
            raise ApiError(422, "cannot exclude every observation")
        return idx

    def create_session(self, dataset_id: str, excluded) -> Session:
        matrix = self.dataset(dataset_id)
        idx = self._check_excluded(matrix, excluded)
        with self._lock:
            session = Session(self._next_id("s"), dataset_id, idx, time.time())
            self._sessions[session.session_id] = session
            return session

    def session(self, dataset_id: str, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None or session.dataset_id != dataset_id:
            raise ApiError(404, f"unknown session {session_id!r}")
        return session

    def update_session(self, dataset_id: str, session_id: str, excluded) -> Session:
        matrix = self.dataset(dataset_id)
        idx = self._check_excluded(matrix, excluded)
        with self._lock:
            old = self._sessions.get(session_id)
            if old is None or old.dataset_id != dataset_id:
                raise ApiError(404, f"unknown session {session_id!r}")
            session = Session(session_id, dataset_id, idx, old.created_at)
            self._sessions[session_id] = session
            return session


def _active_rows(matrix: DataMatrix, session: Session | None) -> list[int]:
    if session is None:
        return list(range(matrix.n_observations))
    return [i for i in range(matrix.n_observations) if i not in session.excluded]


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".json": "application/json; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class AnalysisServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, handler, max_upload: int, quiet: bool, frontend_dir):
        self.store = Store()
        self.max_upload = max_upload
        self.quiet = quiet
        self.frontend_dir = Path(frontend_dir).resolve() if frontend_dir else None
        super().__init__(address, handler)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: AnalysisServer

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):
        if not self.server.quiet:
            super().log_message(fmt, *args)

    def _send(self, status: int, content_type: str, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _json(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self._send(status, "application/json; charset=utf-8", body)

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        if length > self.server.max_upload:
            raise ApiError(413, f"body exceeds {self.server.max_upload} bytes")
        return self.rfile.read(length)

    def _query(self) -> dict[str, str]:
        parsed = parse_qs(urlparse(self.path).query, keep_blank_values=True)
        return {k: v[-1] for k, v in parsed.items()}

    def _route(self) -> list[str]:
        return [p for p in urlparse(self.path).path.split("/") if p]

    def _dispatch(self, method: str) -> None:
        try:
            handler = self._resolve(method)
            handler()
        except ApiError as exc:
            self._json(exc.status, {"error": str(exc)})
        except BrokenPipeError:
            pass
        except Exception as exc:  # noqa: BLE001 - last-resort 500
            self._json(500, {"error": f"{type(exc).__name__}: {exc}"})

    def _resolve(self, method: str):
        parts = self._route()
        if method == "GET":
            if not parts:
                return self._get_root
            if parts == ["datasets"]:
                return self._list_datasets
            if parts[0] == "datasets" and len(parts) >= 2:
                dataset_id = parts[1]
                rest = parts[2:]
                if not rest:
                    return lambda: self._dataset_meta(dataset_id)
                if rest == ["mca"]:
                    return lambda: self._mca(dataset_id, svg=False)
                if rest == ["mca.svg"]:
                    return lambda: self._mca(dataset_id, svg=True)
                if rest == ["subpopulation"]:
                    return lambda: self._subpopulation(dataset_id)
                if rest == ["scatter"]:
                    return lambda: self._scatter(dataset_id)
                if len(rest) == 2 and rest[0] == "sessions":
                    return lambda: self._session_meta(dataset_id, rest[1])
            if self.server.frontend_dir is not None:
                return self._static
        if method == "POST":
            if parts == ["datasets"]:
                return self._upload
            if len(parts) == 3 and parts[0] == "datasets" and parts[2] == "sessions":
                return lambda: self._create_session(parts[1])
        if method == "PATCH":
            if len(parts) == 4 and parts[0] == "datasets" and parts[2] == "sessions":
                return lambda: self._update_session(parts[1], parts[3])
        raise ApiError(404, f"no route for {method} {urlparse(self.path).path}")

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PATCH(self):
        self._dispatch("PATCH")

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- parameter helpers --------------------------------------------------

    def _require(self, query: dict[str, str], name: str) -> str:
        if name not in query or not query[name]:
            raise ApiError(422, f"missing query parameter {name!r}")
        return query[name]

    def _as_int(self, raw: str, name: str) -> int:
        try:
            return int(raw)
        except ValueError:
            raise ApiError(422, f"parameter {name!r} must be an integer, got {raw!r}") from None

    def _as_float(self, raw: str, name: str) -> float:
        try:
            return float(raw)
        except ValueError:
            raise ApiError(422, f"parameter {name!r} must be a number, got {raw!r}") from None

    def _session_from(self, query: dict[str, str], dataset_id: str) -> Session | None:
        if "session" not in query or not query["session"]:
            return None
        return self.server.store.session(dataset_id, query["session"])

    # -- endpoints ----------------------------------------------------------

    def _get_root(self):
        if self.server.frontend_dir is not None:
            return self._static()
        self._json(
            200,
            {
                "service": "mca",
                "endpoints": [
                    "GET /datasets",
                    "POST /datasets",
                    "GET /datasets/{id}",
                    "GET /datasets/{id}/mca",
                    "GET /datasets/{id}/mca.svg",
                    "GET /datasets/{id}/subpopulation",
                    "GET /datasets/{id}/scatter",
                    "POST /datasets/{id}/sessions",
                    "GET /datasets/{id}/sessions/{sid}",
                    "PATCH /datasets/{id}/sessions/{sid}",
                ],
            },
        )

    def _static(self):
        root = self.server.frontend_dir
        rel = urlparse(self.path).path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if root not in target.parents and target != root:
            raise ApiError(404, "not found")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            raise ApiError(404, f"no such file {rel!r}")
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, ctype, target.read_bytes())

    def _list_datasets(self):
        self._json(
            200,
            [
                {
                    "dataset_id": did,
                    "variables": list(m.variable_names),
                    "n_observations": m.n_observations,
                }
                for did, m in self.server.store.list_datasets()
            ],
        )

    def _upload(self):
        body = self._body()
        if not body.strip():
            raise ApiError(400, "empty CSV body")
        try:
            matrix = load_csv(body)
        except (CsvFormatError, ValueError) as exc:
            raise ApiError(400, f"malformed CSV: {exc}") from None
        dataset_id = self.server.store.add_dataset(matrix)
        self._json(
            200,
            {
                "dataset_id": dataset_id,
                "variables": list(matrix.variable_names),
                "n_observations": matrix.n_observations,
            },
        )

    def _dataset_meta(self, dataset_id: str):
        matrix = self.server.store.dataset(dataset_id)
        self._json(
            200,
            {
                "dataset_id": dataset_id,
                "variables": list(matrix.variable_names),
                "n_observations": matrix.n_observations,
                "excluded_variables": sorted(matrix.excluded_variables),
            },
        )

    def _grid_for(self, dataset_id: str, query: dict[str, str]):
        matrix = self.server.store.dataset(dataset_id)
        session = self._session_from(query, dataset_id)
        sort = self._require(query, "sort")
        x = self._require(query, "x")
        y = self._require(query, "y")
        resolution = self._as_int(self._require(query, "r"), "r")
        method = query.get("method", "pearson")
        p = self._as_float(query.get("p", "0.05"), "p")
        min_n = self._as_int(query.get("min_n", "3"), "min_n")
        try:
            return build_grid(
                matrix, sort, x, y, resolution,
                method=method, p_threshold=p, min_members=min_n,
                active=_active_rows(matrix, session),
            )
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None

    def _mca(self, dataset_id: str, svg: bool):
        grid = self._grid_for(dataset_id, self._query())
        if svg:
            query = self._query()
            mode = query.get("abscissa", "quantile")
            if mode not in ("quantile", "median"):
                raise ApiError(422, f"abscissa must be quantile or median, got {mode!r}")
            opts = RenderOptions(
                abscissa_mode="quantile" if mode == "quantile" else "median_value"
            )
            self._send(200, "image/svg+xml", render_mca(grid, opts).encode("utf-8"))
        else:
            self._json(200, [cell_to_dict(c) for c in grid.cells])

    def _subpopulation(self, dataset_id: str):
        query = self._query()
        matrix = self.server.store.dataset(dataset_id)
        session = self._session_from(query, dataset_id)
        sort = self._require(query, "sort")
        alpha = self._as_float(self._require(query, "alpha"), "alpha")
        beta = self._as_float(self._require(query, "beta"), "beta")
        try:
            window = resolve_window(
                matrix, sort, alpha, beta, active=_active_rows(matrix, session)
            )
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None
        self._json(
            200,
            {
                "indices": sorted(window.members),
                "median_s": round12(window.median_sorting_value),
                "n": window.n,
            },
        )

    def _scatter(self, dataset_id: str):
        query = self._query()
        matrix = self.server.store.dataset(dataset_id)
        session = self._session_from(query, dataset_id)
        x = self._require(query, "x")
        y = self._require(query, "y")
        try:
            xi = matrix.column(x)
            yj = matrix.column(y)
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None
        xm = matrix.column_missing(x)
        ym = matrix.column_missing(y)
        points = [
            {"index": i, "x": round12(float(xi[i])), "y": round12(float(yj[i]))}
            for i in _active_rows(matrix, session)
            if not (xm[i] or ym[i])
        ]
        self._json(200, {"points": points, "n": len(points)})

    def _create_session(self, dataset_id: str):
        payload = self._json_body()
        session = self.server.store.create_session(dataset_id, payload.get("excluded", []))
        self._json(
            200,
            {"session_id": session.session_id, "excluded": sorted(session.excluded)},
        )

    def _session_meta(self, dataset_id: str, session_id: str):
        session = self.server.store.session(dataset_id, session_id)
        self._json(
            200,
            {
                "session_id": session.session_id,
                "dataset_id": session.dataset_id,
                "excluded": sorted(session.excluded),
            },
        )

    def _update_session(self, dataset_id: str, session_id: str):
        payload = self._json_body()
        if "excluded" not in payload:
            raise ApiError(422, 'body must carry an "excluded" list')
        session = self.server.store.update_session(
            dataset_id, session_id, payload["excluded"]
        )
        self._json(
            200,
            {"session_id": session.session_id, "excluded": sorted(session.excluded)},
        )

    def _json_body(self) -> dict:
        body = self._body()
        if not body:
            return {}
        try:
            payload = json.loads(body)
        except json.JSONDecodeError as exc:
            raise ApiError(422, f"invalid JSON body: {exc}") from None
        if not isinstance(payload, dict):
            raise ApiError(422, "JSON body must be an object")
        return payload


def create_server(
    host: str = "127.0.0.1",
    port: int = 0,
    max_upload: int = DEFAULT_MAX_UPLOAD,
    quiet: bool = True,
    frontend_dir=None,
) -> AnalysisServer:
    """Build (and bind) the analysis server; call serve_forever() to run."""
    return AnalysisServer((host, port), _Handler, max_upload, quiet, frontend_dir)
