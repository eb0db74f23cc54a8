"""Offline stand-in for the web archive.

Replays fixture captures through the same two endpoints the crawler uses
(CDX listing and raw-capture fetch), records every request it sees and can
inject throttling responses. Used by the test-suite and for dry runs:

    python -m app.adapters.mock_archive --fixture captures.json --port 8765
"""

import argparse
import asyncio
import hashlib
import json
import logging
import re
import socket
import threading
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, RedirectResponse, Response
from pydantic import BaseModel

from app.core.models import parse_timestamp

logger = logging.getLogger(__name__)


class Capture(BaseModel):
    url: str
    timestamp: str
    status: int = 200
    mime: str = "text/html"
    body: str = ""
    redirect_url: Optional[str] = None
    redirect_timestamp: Optional[str] = None
    live_redirect: Optional[str] = None


class RequestRecord(BaseModel):
    host: str
    path: str
    started: float
    finished: float = 0.0
    status: int = 0


def url_key(url: str) -> str:
    key = re.sub(r"^https?:/+", "", url.strip().lower())
    if key.startswith("www."):
        key = key[4:]
    return key.rstrip("/")


class MockArchive:
    def __init__(self, captures: Optional[List[Capture]] = None, latency: float = 0.0):
        self.captures: Dict[str, List[Capture]] = {}
        self.latency = latency
        self.requests: List[RequestRecord] = []
        self.in_flight = 0
        self.peak_in_flight = 0
        self._pending_failures: List[int] = []
        self._lock = threading.Lock()
        for capture in captures or []:
            self.add(capture)

    @classmethod
    def from_file(cls, path: str) -> "MockArchive":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        base = Path(path).parent
        captures = []
        for item in data.get("captures", []):
            body_file = item.pop("body_file", None)
            if body_file:
                item["body"] = (base / body_file).read_text(encoding="utf-8")
            captures.append(Capture(**item))
        return cls(captures, latency=data.get("latency", 0.0))

    def add(self, capture: Capture) -> None:
        parse_timestamp(capture.timestamp)
        captures = self.captures.setdefault(url_key(capture.url), [])
        captures.append(capture)
        captures.sort(key=lambda c: c.timestamp)

    def fail_next(self, count: int = 1, status: int = 429) -> None:
        with self._lock:
            self._pending_failures.extend([status] * count)

    def _take_failure(self) -> Optional[int]:
        with self._lock:
            return self._pending_failures.pop(0) if self._pending_failures else None

    def hosts(self) -> set:
        return {record.host for record in self.requests}

    def cdx_rows(self, url: str) -> list:
        rows = []
        for capture in self.captures.get(url_key(url), []):
            body = capture.body.encode("utf-8")
            rows.append([
                url_key(capture.url),
                capture.timestamp,
                capture.url,
                capture.mime,
                str(capture.status),
                hashlib.sha1(body).hexdigest().upper(),
                str(len(body)),
            ])
        if not rows:
            return []
        return [["urlkey", "timestamp", "original", "mimetype", "statuscode", "digest", "length"]] + rows

    def lookup(self, url: str, timestamp: str) -> Optional[Capture]:
        """Exact capture, else the nearest one in time (the archive's own behaviour)."""
        captures = self.captures.get(url_key(url), [])
        if not captures:
            return None
        wanted = parse_timestamp(timestamp)
        return min(captures, key=lambda c: (abs((parse_timestamp(c.timestamp) - wanted).total_seconds()), c.timestamp))


def create_app(archive: MockArchive) -> FastAPI:
    app = FastAPI(title="Mock Web Archive", docs_url=None, redoc_url=None)

    @app.middleware("http")
    async def record_requests(request: Request, call_next):
        record = RequestRecord(
            host=request.headers.get("host", ""),
            path=request.url.path,
            started=time.monotonic(),
        )
        with archive._lock:
            archive.requests.append(record)
            archive.in_flight += 1
            archive.peak_in_flight = max(archive.peak_in_flight, archive.in_flight)
        try:
            if archive.latency:
                await asyncio.sleep(archive.latency)
            failure = archive._take_failure()
            if failure is not None:
                response = Response(status_code=failure)
            else:
                response = await call_next(request)
            record.status = response.status_code
            return response
        finally:
            record.finished = time.monotonic()
            with archive._lock:
                archive.in_flight -= 1

    @app.get("/cdx/search/cdx")
    def cdx(url: str, output: str = "json"):
        return JSONResponse(archive.cdx_rows(url))

    @app.get("/web/{stamp}/{rest:path}")
    def capture(stamp: str, rest: str, request: Request):
        timestamp = stamp[:14]
        original = rest + (f"?{request.url.query}" if request.url.query else "")
        found = archive.lookup(original, timestamp)
        if found is None:
            return Response(status_code=404)
        if found.timestamp != timestamp:
            return RedirectResponse(f"/web/{found.timestamp}id_/{found.url}", status_code=302)
        if found.live_redirect:
            return RedirectResponse(found.live_redirect, status_code=302)
        if found.redirect_url and found.redirect_timestamp:
            return RedirectResponse(
                f"/web/{found.redirect_timestamp}id_/{found.redirect_url}", status_code=302
            )
        return Response(content=found.body.encode("utf-8"), media_type=found.mime, status_code=found.status)

    return app


def _free_port(host: str) -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.bind((host, 0))
        return sock.getsockname()[1]


@contextmanager
def serve_in_thread(archive: MockArchive, host: str = "127.0.0.1", port: int = 0):
    """Run the mock archive on a background thread and yield its endpoint."""
    port = port or _free_port(host)
    server = uvicorn.Server(uvicorn.Config(create_app(archive), host=host, port=port, log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline or not thread.is_alive():
            raise RuntimeError("Mock archive failed to start")
        time.sleep(0.01)
    try:
        yield f"http://{host}:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=10)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Serve fixture captures as a web archive")
    parser.add_argument("--fixture", required=True, help="captures.json fixture file")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    args = parser.parse_args()
    uvicorn.run(create_app(MockArchive.from_file(args.fixture)), host=args.host, port=args.port, log_level="info")
