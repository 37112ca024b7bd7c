"""Interactive simulation service and its TCP wire protocol.

McfsmService hosts live sessions in-process: each session wraps one
immutable model plus its current state and trace history. ProtocolServer
exposes the same operations as newline-delimited JSON over a local TCP
socket; docs/protocol.md fixes the message layout.

Every message, both directions, is one JSON object per line with fields
``type``, ``session``, ``seq``, ``payload``. Trace pushes carry the
1-based history index as their seq, so clients can deduplicate and order.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
from dataclasses import dataclass, field
from typing import Callable

from .analysis import (
    DEFAULT_STATE_CAP,
    cascade_bound,
    reachable_states,
)
from .dsl import compile_model
from .errors import (
    CascadeOverflow,
    Diagnostic,
    DslError,
    McfsmError,
    SessionNotFound,
    StateSpaceTooLarge,
    UnknownExternalEvent,
)
from .model import GlobalState, ResolvedModel
from .runtime import (
    DEFAULT_CASCADE_CAP,
    MacroStepTrace,
    RuntimeSession,
    trace_to_dict,
)

QUERY_KINDS = ("state", "bound-report", "model-graph", "reachable-count")

Subscriber = Callable[[str, int, MacroStepTrace], None]


def _leaf(path: str) -> str:
    return path.rsplit("/", 1)[-1]


def state_to_dict(state: GlobalState) -> dict[str, str]:
    return {_leaf(s.machine): s.name for s in state.states}


@dataclass(eq=False)
class Session:
    """One live model instance; injections serialize through the runtime lock."""

    id: str
    model: ResolvedModel
    runtime: RuntimeSession
    subscribers: list[Subscriber] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def state(self) -> GlobalState:
        return self.runtime.state

    @property
    def history(self) -> list[MacroStepTrace]:
        return self.runtime.history


class McfsmService:
    """Session registry plus the operations the wire protocol exposes."""

    def __init__(
        self,
        *,
        cascade_cap: int = DEFAULT_CASCADE_CAP,
        state_cap: int = DEFAULT_STATE_CAP,
    ):
        self.cascade_cap = cascade_cap
        self.state_cap = state_cap
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = 0
        self._bound_cache: dict[str, object] = {}

    # -- lifecycle

    def create_session(
        self, source: str, mcfsm_class: str | None = None, *, filename: str = "<input>"
    ) -> tuple[Session | None, list[Diagnostic]]:
        """Compile source and open a session at the initial state.

        DSL problems never raise; they come back as the diagnostics list.
        """
        try:
            model = compile_model(source, mcfsm_class, filename=filename)
        except DslError as err:
            return None, err.diagnostics
        with self._lock:
            self._counter += 1
            session = Session(
                id=f"s{self._counter}",
                model=model,
                runtime=RuntimeSession(model, cascade_cap=self.cascade_cap),
            )
            self._sessions[session.id] = session
        return session, []

    def session(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionNotFound(session_id) from None

    def session_ids(self) -> tuple[str, ...]:
        return tuple(self._sessions)

    # -- operations

    def inject(self, session_id: str, event: str) -> tuple[MacroStepTrace, int]:
        """Run one macro-step; returns (trace, 1-based history index).

        Subscribers are notified in order, inside the session lock, so every
        observer sees the same total order of traces.
        """
        session = self.session(session_id)
        with session.lock:
            trace = session.runtime.inject(event)
            seq = len(session.runtime.history)
            for callback in list(session.subscribers):
                callback(session.id, seq, trace)
        return trace, seq

    def subscribe(self, session_id: str, callback: Subscriber) -> Callable[[], None]:
        session = self.session(session_id)
        with session.lock:
            session.subscribers.append(callback)

        def unsubscribe() -> None:
            with session.lock:
                if callback in session.subscribers:
                    session.subscribers.remove(callback)

        return unsubscribe

    def query(self, session_id: str, what: str) -> dict:
        session = self.session(session_id)
        if what == "state":
            with session.lock:
                return {
                    "state": state_to_dict(session.state),
                    "history_length": len(session.history),
                }
        if what == "bound-report":
            return self._bound_report(session)
        if what == "model-graph":
            return model_graph(session.model)
        if what == "reachable-count":
            try:
                count = len(reachable_states(session.model, max_states=self.state_cap))
                return {"count": count, "capped": False}
            except StateSpaceTooLarge as err:
                return {"count": err.limit, "capped": True}
        raise ValueError(f"unknown query {what!r} (one of: {', '.join(QUERY_KINDS)})")

    def _bound_report(self, session: Session) -> dict:
        cached = self._bound_cache.get(session.id)
        if cached is None:
            report = cascade_bound(session.model)
            cached = {
                "model": report.model_name,
                "entries": [
                    {
                        "event": e.event,
                        "bound": e.bound,
                        "max_fired": e.max_fired,
                        "witness": list(e.witness),
                        "cycle": list(e.cycle) if e.cycle is not None else None,
                    }
                    for e in report.entries
                ],
                "bounds": {_leaf(e.event): e.bound for e in report.entries},
            }
            self._bound_cache[session.id] = cached
        return cached


def model_graph(model: ResolvedModel) -> dict:
    """Node/edge rendering data: consumed events above edges, emitted below."""
    machines = []
    for machine in model.machines:
        machines.append({
            "path": machine.instance_path,
            "name": _leaf(machine.instance_path),
            "class": machine.class_name,
            "start": machine.start.name,
            "states": [s.name for s in machine.states],
            "edges": [
                {
                    "src": e.id.src.name,
                    "dst": e.id.dst.name,
                    "hop": e.id.hop_name,
                    "above": [
                        ev.path if hasattr(ev, "path") else ev.edge.path
                        for ev in e.captures
                    ],
                    "below": sorted(e.y_labels),
                }
                for e in machine.edges
            ],
        })
    return {
        "model": model.name,
        "external_events": list(model.external_events),
        "machines": machines,
    }


# ---------------------------------------------------------------------------
# wire protocol


def _envelope(type_: str, session: str | None, seq: int, payload: dict) -> bytes:
    doc = {"type": type_, "session": session, "seq": seq, "payload": payload}
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")


def _diagnostic_to_dict(diag: Diagnostic) -> dict:
    return {
        "file": diag.file,
        "line": diag.line,
        "col": diag.col,
        "severity": diag.severity,
        "code": diag.code,
        "message": diag.message,
    }


class _Handler(socketserver.StreamRequestHandler):
    """One JSON-lines client connection; trace pushes share the write lock."""

    server: "ProtocolServer"

    def setup(self):
        super().setup()
        self._write_lock = threading.Lock()
        self._unsubscribes: list[Callable[[], None]] = []
        self._subscribed: set[str] = set()

    def _send(self, type_: str, session: str | None, seq: int, payload: dict):
        data = _envelope(type_, session, seq, payload)
        with self._write_lock:
            self.wfile.write(data)
            self.wfile.flush()

    def _error(self, session: str | None, seq: int, code: str, message: str, **extra):
        self._send("error", session, seq, {"code": code, "message": message, **extra})

    def handle(self):
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError as err:
                self._error(None, 0, "bad-request", f"not valid JSON: {err}")
                continue
            if not isinstance(msg, dict):
                self._error(None, 0, "bad-request", "message must be a JSON object")
                continue
            mtype = msg.get("type")
            session_id = msg.get("session")
            seq = msg.get("seq", 0) if isinstance(msg.get("seq"), int) else 0
            payload = msg.get("payload")
            payload = payload if isinstance(payload, dict) else {}
            try:
                if mtype == "create":
                    self._handle_create(seq, payload)
                elif mtype == "inject":
                    self._handle_inject(session_id, seq, payload)
                elif mtype == "query":
                    self._handle_query(session_id, seq, payload)
                else:
                    self._error(session_id, seq, "bad-request",
                                f"unknown message type {mtype!r}")
            except SessionNotFound as err:
                self._error(session_id, seq, "session-not-found", str(err))
            except UnknownExternalEvent as err:
                self._error(session_id, seq, "unknown-external-event", str(err))
            except CascadeOverflow as err:
                self._error(session_id, seq, "cascade-overflow", str(err),
                            event=getattr(err.event, "path", str(err.event)),
                            limit=err.limit)
            except ValueError as err:
                self._error(session_id, seq, "bad-request", str(err))
            except McfsmError as err:
                self._error(session_id, seq, "internal", str(err))

    def _subscribe(self, session_id: str):
        def push(sid: str, seq: int, trace: MacroStepTrace):
            try:
                self._send("trace", sid, seq, trace_to_dict(trace))
            except OSError:
                pass  # connection is gone; finish() unsubscribes

        self._unsubscribes.append(self.server.service.subscribe(session_id, push))
        self._subscribed.add(session_id)

    def _handle_create(self, seq: int, payload: dict):
        source = payload.get("source")
        if not isinstance(source, str):
            raise ValueError("create payload needs a 'source' string")
        mcfsm_class = payload.get("mcfsm_class")
        if mcfsm_class is not None and not isinstance(mcfsm_class, str):
            raise ValueError("'mcfsm_class' must be a string when present")
        session, diagnostics = self.server.service.create_session(source, mcfsm_class)
        if session is None:
            self._send("diag", None, seq, {
                "diagnostics": [_diagnostic_to_dict(d) for d in diagnostics],
            })
            return
        self._subscribe(session.id)
        self._send("create", session.id, seq, {
            "model": session.model.name,
            "state": state_to_dict(session.state),
            "external_events": list(session.model.external_events),
        })

    def _handle_inject(self, session_id, seq: int, payload: dict):
        if not isinstance(session_id, str):
            raise ValueError("inject needs a 'session' id")
        event = payload.get("event")
        if not isinstance(event, str):
            raise ValueError("inject payload needs an 'event' string")
        trace, index = self.server.service.inject(session_id, event)
        if session_id not in self._subscribed:
            # subscribers already got the push inside inject()
            self._send("trace", session_id, index, trace_to_dict(trace))

    def _handle_query(self, session_id, seq: int, payload: dict):
        if not isinstance(session_id, str):
            raise ValueError("query needs a 'session' id")
        what = payload.get("what")
        if what == "subscribe":
            self.server.service.session(session_id)  # raises if unknown
            self._subscribe(session_id)
            self._send("query", session_id, seq, {"what": "subscribe", "attached": True})
            return
        result = self.server.service.query(session_id, what)
        self._send("query", session_id, seq, {"what": what, "result": result})

    def finish(self):
        for unsubscribe in self._unsubscribes:
            unsubscribe()
        super().finish()


class ProtocolServer(socketserver.ThreadingTCPServer):
    """JSON-lines protocol endpoint bound to the loopback interface."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, service: McfsmService | None = None,
                 host: str = "127.0.0.1", port: int = 7333):
        self.service = service if service is not None else McfsmService()
        super().__init__((host, port), _Handler)

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve_forever(host: str = "127.0.0.1", port: int = 7333) -> None:
    """Blocking entry point used by the CLI."""
    with ProtocolServer(host=host, port=port) as server:
        print(f"listening on {server.server_address[0]}:{server.port}")
        server.serve_forever()


class ProtocolClient:
    """Minimal blocking client, used by tests and scripting."""

    def __init__(self, host: str, port: int, *, timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self._sock.makefile("rwb")
        self._seq = 0

    def close(self) -> None:
        try:
            self._file.close()
        finally:
            self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def send(self, type_: str, session: str | None = None,
             payload: dict | None = None, seq: int | None = None) -> int:
        if seq is None:
            self._seq += 1
            seq = self._seq
        self._file.write(_envelope(type_, session, seq, payload or {}))
        self._file.flush()
        return seq

    def recv(self) -> dict:
        line = self._file.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        return json.loads(line)

    def request(self, type_: str, session: str | None = None,
                payload: dict | None = None) -> dict:
        self.send(type_, session, payload)
        return self.recv()
