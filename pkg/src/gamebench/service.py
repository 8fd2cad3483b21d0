"""Per-session network service: live state, observations, and human play.

Endpoints (JSON bodies use the canonical serialization):

  GET  /state            current snapshot
  GET  /observation.ppm  current frame bytes (binary P6 pixmap)
  GET  /observation.txt  current text grid
  GET  /run              run record so far, plus the task header
  GET  /events           step-completion notifications (SSE stream)
  POST /action           one normalized action (human sessions only)
  POST /reset            manual episode reset (human sessions only)

The service never mutates the session itself: actions are queued to the
owning run loop, which serialises all session mutations, evaluates the
step, and answers through the queue. One physical input costs one step
of the budget; requests past the budget are rejected.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from .agents import Decision
from .evaluator import RUNNING, RunRecord
from .runtime import RESET_REQUEST
from .state import canonical_json


class PortInUseError(OSError):
    pass


@dataclass
class _Pending:
    payload: Any
    reply: "queue.Queue[dict[str, Any]]" = field(default_factory=lambda: queue.Queue(maxsize=1))


class HumanBridge:
    """Hands queued HTTP actions to the run loop, one step at a time."""

    def __init__(self) -> None:
        self.actions: "queue.Queue[_Pending]" = queue.Queue()
        self._current: _Pending | None = None
        self.resets: "queue.Queue[_Pending]" = queue.Queue()

    def submit(self, payload: Any) -> _Pending:
        pending = _Pending(payload=payload)
        self.actions.put(pending)
        return pending

    def submit_reset(self) -> _Pending:
        pending = _Pending(payload=RESET_REQUEST)
        self.actions.put(pending)
        return pending

    def decide(self, bundle, snapshot) -> Decision:
        """Blocks the run loop until a human action arrives."""
        self._current = self.actions.get()
        return Decision(payload=self._current.payload, latency_ms=0.0,
                        input_tokens=bundle.estimate_tokens())

    def step_done(self, result: dict[str, Any]) -> None:
        if self._current is not None:
            try:
                self._current.reply.put_nowait(result)
            except queue.Full:
                pass
            self._current = None


class SessionService:
    """Threaded HTTP server publishing one run's live state."""

    def __init__(self, port: int, human: HumanBridge | None = None, host: str = "127.0.0.1") -> None:
        self.human = human
        self._lock = threading.Lock()
        self._snapshot_doc: dict[str, Any] | None = None
        self._observation_text = ""
        self._frame = b""
        self._record: RunRecord | None = None
        self._task_doc: dict[str, Any] = {}
        self._subscribers: list[queue.Queue] = []
        service = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args) -> None:
                pass

            def do_GET(self) -> None:  # noqa: N802  (stdlib naming)
                service._handle_get(self)

            def do_POST(self) -> None:  # noqa: N802
                service._handle_post(self)

        try:
            self._server = ThreadingHTTPServer((host, port), Handler)
        except OSError as exc:
            raise PortInUseError(f"port {port} unavailable: {exc}") from exc
        self.port = self._server.server_address[1]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def start(self) -> "SessionService":
        self._thread.start()
        return self

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    @property
    def address(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    # -- publishing ---------------------------------------------------------

    def set_task(self, task_doc: dict[str, Any]) -> None:
        with self._lock:
            self._task_doc = task_doc

    def publish(self, info: dict[str, Any]) -> None:
        """Run-loop callback: refresh live state and notify subscribers."""
        with self._lock:
            self._snapshot_doc = info.get("snapshot")
            self._observation_text = info.get("observationText", "")
            if info.get("frame"):
                self._frame = info["frame"]
            self._record = info.get("record")
            subscribers = list(self._subscribers)
        event = {
            "step": info.get("step"),
            "stepsUsed": info.get("stepsUsed"),
            "budgetRemaining": info.get("budgetRemaining"),
            "runStatus": info.get("runStatus"),
            "runProgress": info.get("runProgress"),
            "verdict": info.get("verdict"),
            "status": (info.get("snapshot") or {}).get("status"),
        }
        for sub in subscribers:
            try:
                sub.put_nowait(event)
            except queue.Full:
                pass
        if self.human is not None:
            self.human.step_done({
                "snapshot": info.get("snapshot"),
                "verdict": info.get("verdict"),
                "stepsUsed": info.get("stepsUsed"),
                "budgetRemaining": info.get("budgetRemaining"),
                "runStatus": info.get("runStatus"),
                "runProgress": info.get("runProgress"),
            })

    def publish_initial(self, snapshot_doc: dict[str, Any], observation_text: str, frame: bytes,
                        record: RunRecord) -> None:
        with self._lock:
            self._snapshot_doc = snapshot_doc
            self._observation_text = observation_text
            self._frame = frame
            self._record = record

    # -- request handling ----------------------------------------------------

    def _handle_get(self, request: BaseHTTPRequestHandler) -> None:
        path = request.path.split("?", 1)[0]
        if path == "/state":
            with self._lock:
                doc = self._snapshot_doc
            if doc is None:
                _send_json(request, 404, {"error": "no state published yet"})
            else:
                _send_json(request, 200, doc)
        elif path == "/observation.txt":
            with self._lock:
                text = self._observation_text
            _send_bytes(request, 200, text.encode("utf-8"), "text/plain; charset=utf-8")
        elif path == "/observation.ppm":
            with self._lock:
                frame = self._frame
            _send_bytes(request, 200, frame, "image/x-portable-pixmap")
        elif path == "/run":
            with self._lock:
                record = self._record
                task_doc = self._task_doc
            if record is None:
                _send_json(request, 404, {"error": "no run attached"})
            else:
                _send_json(request, 200, {"record": record.to_doc(), "task": task_doc})
        elif path == "/events":
            self._stream_events(request)
        else:
            _send_json(request, 404, {"error": f"unknown path {path}"})

    def _handle_post(self, request: BaseHTTPRequestHandler) -> None:
        path = request.path.split("?", 1)[0]
        if path not in ("/action", "/reset"):
            _send_json(request, 404, {"error": f"unknown path {path}"})
            return
        if self.human is None:
            _send_json(request, 409, {"error": "not a human session"})
            return
        with self._lock:
            record = self._record
            task_doc = self._task_doc
        if path == "/action":
            length = int(request.headers.get("Content-Length") or 0)
            try:
                body = json.loads(request.rfile.read(length).decode("utf-8")) if length else {}
            except json.JSONDecodeError:
                _send_json(request, 400, {"error": "malformed request body"})
                return
            if not isinstance(body, dict) or "kind" not in body:
                _send_json(request, 400, {"error": "body must be a normalized action with a kind"})
                return
            if record is not None and record.status != RUNNING:
                _send_json(request, 409, {"error": "run finished", "runStatus": record.status})
                return
            max_steps = int(task_doc.get("maxSteps", 0))
            if record is not None and max_steps and record.steps_used >= max_steps:
                _send_json(request, 409, {"error": "budget-exhausted",
                                          "stepsUsed": record.steps_used})
                return
            pending = self.human.submit({"name": body["kind"], "arguments": body})
        else:
            if record is not None and record.status != RUNNING:
                _send_json(request, 409, {"error": "run finished", "runStatus": record.status})
                return
            pending = self.human.submit_reset()
        try:
            result = pending.reply.get(timeout=30.0)
        except queue.Empty:
            _send_json(request, 504, {"error": "step did not complete in time"})
            return
        _send_json(request, 200, result)

    def _stream_events(self, request: BaseHTTPRequestHandler) -> None:
        sub: queue.Queue = queue.Queue(maxsize=256)
        with self._lock:
            self._subscribers.append(sub)
        try:
            request.send_response(200)
            request.send_header("Content-Type", "text/event-stream")
            request.send_header("Cache-Control", "no-cache")
            request.send_header("Connection", "close")
            request.end_headers()
            request.wfile.write(b": connected\n\n")
            request.wfile.flush()
            while True:
                try:
                    event = sub.get(timeout=1.0)
                except queue.Empty:
                    request.wfile.write(b": keepalive\n\n")
                    request.wfile.flush()
                    continue
                data = canonical_json(event)
                request.wfile.write(f"data: {data}\n\n".encode("utf-8"))
                request.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            with self._lock:
                if sub in self._subscribers:
                    self._subscribers.remove(sub)


def _send_json(request: BaseHTTPRequestHandler, status: int, doc: Any) -> None:
    _send_bytes(request, status, (canonical_json(doc) + "\n").encode("utf-8"),
                "application/json; charset=utf-8")


def _send_bytes(request: BaseHTTPRequestHandler, status: int, body: bytes, content_type: str) -> None:
    try:
        request.send_response(status)
        request.send_header("Content-Type", content_type)
        request.send_header("Content-Length", str(len(body)))
        request.end_headers()
        request.wfile.write(body)
    except (BrokenPipeError, ConnectionResetError):
        pass
