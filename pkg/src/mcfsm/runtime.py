"""Execution engine: event buffering, macro-steps, sessions and side-effect handlers.

One external event starts a macro-step. The runtime pops events off an XQueue,
offers each to every machine in dispatch order, and pushes every fired edge
back as an internal event, until the queue drains. The whole cascade is one
atomic state change; handlers observe only quiesced states.
"""

from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import CascadeOverflow, McfsmError, SequenceError, UnknownExternalEvent
from .model import (
    EdgeId,
    EventRef,
    ExternalEvent,
    GlobalState,
    InternalEvent,
    ResolvedModel,
    initial_state,
    validate_state,
)

DEFAULT_CASCADE_CAP = 10_000

Handler = Callable[[EdgeId, "MacroStepTrace"], None]


class XQueue:
    """Two-segment event buffer.

    Internal events (fired edges) are drained completely before any external
    event is popped; within each segment order is strictly FIFO. Internals
    produced while an internal is being processed join the tail of the
    internal segment.
    """

    __slots__ = ("_internal", "_external")

    def __init__(self):
        self._internal: deque[InternalEvent] = deque()
        self._external: deque[ExternalEvent] = deque()

    def push(self, event: EventRef) -> None:
        if isinstance(event, InternalEvent):
            self._internal.append(event)
        else:
            self._external.append(event)

    def pop(self) -> EventRef:
        if self._internal:
            return self._internal.popleft()
        return self._external.popleft()

    @property
    def empty(self) -> bool:
        return not (self._internal or self._external)

    @property
    def has_internal(self) -> bool:
        return bool(self._internal)

    def __len__(self) -> int:
        return len(self._internal) + len(self._external)


@dataclass(frozen=True, slots=True)
class MacroStepTrace:
    """Complete record of one macro-step.

    fired_during[i] is the index into processed_events of the event that made
    fired_edges[i] fire; it exposes the causation chain without re-simulation.
    """

    triggering_event: ExternalEvent
    processed_events: tuple[EventRef, ...]
    fired_edges: tuple[EdgeId, ...]
    fired_during: tuple[int, ...]
    pre_state: GlobalState
    post_state: GlobalState

    @property
    def step_count(self) -> int:
        return len(self.processed_events)


def resolve_external(model: ResolvedModel, name: str) -> ExternalEvent:
    """Accept a full event path or its leaf name (leaves are unique per model)."""
    path = name if name.startswith("/") else f"/{model.name}/{name}"
    if path not in model.external_events:
        raise UnknownExternalEvent(name, model.name)
    return ExternalEvent(path)


def _as_external(model: ResolvedModel, event) -> ExternalEvent:
    if isinstance(event, str):
        return resolve_external(model, event)
    if isinstance(event, ExternalEvent):
        if event.path not in model.external_events:
            raise UnknownExternalEvent(event.path, model.name)
        return event
    raise UnknownExternalEvent(str(event), model.name)


def macro_step(
    model: ResolvedModel,
    state: GlobalState,
    event,
    *,
    registry: "HandlerRegistry | None" = None,
    cascade_cap: int = DEFAULT_CASCADE_CAP,
) -> tuple[GlobalState, MacroStepTrace]:
    """Run one complete cascade; returns the quiesced state and its trace.

    The state change is atomic with respect to handlers: all bound handlers
    run after the queue has drained, in fired-edges order.
    """
    ext = _as_external(model, event)
    validate_state(model, state)
    machines = model.dispatch_machines
    local = {s.machine: s.name for s in state.states}

    queue = XQueue()
    queue.push(ext)
    processed: list[EventRef] = []
    fired: list[EdgeId] = []
    fired_during: list[int] = []
    while not queue.empty:
        if len(processed) >= cascade_cap:
            raise CascadeOverflow(ext, cascade_cap, state=state)
        current = queue.pop()
        processed.append(current)
        index = len(processed) - 1
        path = current.path
        for machine in machines:
            edge = machine.edge_for(local[machine.instance_path], path)
            if edge is None:
                continue
            # the local move is visible to machines later in dispatch order
            local[machine.instance_path] = edge.id.dst.name
            fired.append(edge.id)
            fired_during.append(index)
            queue.push(InternalEvent(edge.id))

    post = GlobalState(tuple(m.state(local[m.instance_path]) for m in model.machines))
    trace = MacroStepTrace(
        triggering_event=ext,
        processed_events=tuple(processed),
        fired_edges=tuple(fired),
        fired_during=tuple(fired_during),
        pre_state=state,
        post_state=post,
    )
    if registry is not None:
        registry.dispatch(model, trace)
    return post, trace


def run_sequence(
    model: ResolvedModel,
    state: GlobalState,
    events: Iterable,
    *,
    registry: "HandlerRegistry | None" = None,
    cascade_cap: int = DEFAULT_CASCADE_CAP,
) -> tuple[GlobalState, tuple[MacroStepTrace, ...]]:
    """Fold macro_step over a sequence of external events."""
    traces: list[MacroStepTrace] = []
    for index, event in enumerate(events):
        try:
            state, trace = macro_step(
                model, state, event, registry=registry, cascade_cap=cascade_cap
            )
        except McfsmError as err:
            raise SequenceError(index, err) from err
        traces.append(trace)
    return state, tuple(traces)


class HandlerRegistry:
    """Side-effect callbacks keyed by edge identity or semantic label.

    Dispatch happens once per macro-step, after quiescence, walking the fired
    edges in order. Per edge, identity bindings run before label bindings;
    label bindings run in alphabetical label order.
    """

    def __init__(self):
        self._by_edge: dict[EdgeId, list[Handler]] = {}
        self._by_label: dict[str, list[Handler]] = {}

    def bind(self, key: "EdgeId | str", handler: Handler) -> None:
        if isinstance(key, EdgeId):
            self._by_edge.setdefault(key, []).append(handler)
        else:
            self._by_label.setdefault(key, []).append(handler)

    def dispatch(self, model: ResolvedModel, trace: MacroStepTrace) -> None:
        if not (self._by_edge or self._by_label):
            return
        for edge_id in trace.fired_edges:
            for handler in self._by_edge.get(edge_id, ()):
                handler(edge_id, trace)
            edge = model.machine(edge_id.machine).edge(edge_id)
            for label in sorted(edge.x_labels | edge.y_labels):
                for handler in self._by_label.get(label, ()):
                    handler(edge_id, trace)


class RuntimeSession:
    """A model plus live state, history and handlers; injections are serialized.

    Handlers may call inject(); such events are not processed synchronously
    but queued for their own macro-steps right after the current one, keeping
    every state change atomic.
    """

    def __init__(
        self,
        model: ResolvedModel,
        *,
        registry: HandlerRegistry | None = None,
        cascade_cap: int = DEFAULT_CASCADE_CAP,
    ):
        self.model = model
        self.registry = registry if registry is not None else HandlerRegistry()
        self.state = initial_state(model)
        self.history: list[MacroStepTrace] = []
        self.cascade_cap = cascade_cap
        self._lock = threading.RLock()
        self._draining = False
        self._pending: deque = deque()

    def inject(self, event) -> MacroStepTrace | None:
        """Run one macro-step (plus any handler-injected follow-ups).

        Returns the trace of the injected event, or None when called from
        inside a handler (the event is deferred to its own macro-step).
        """
        with self._lock:
            if self._draining:
                self._pending.append(event)
                return None
            self._draining = True
            try:
                first: MacroStepTrace | None = None
                todo = deque([event])
                while todo:
                    current = todo.popleft()
                    self.state, trace = macro_step(
                        self.model, self.state, current, cascade_cap=self.cascade_cap
                    )
                    self.history.append(trace)
                    if first is None:
                        first = trace
                    self.registry.dispatch(self.model, trace)  # may add to _pending
                    todo.extend(self._pending)
                    self._pending.clear()
                return first
            finally:
                self._draining = False

    def run(self, events: Sequence) -> tuple[MacroStepTrace, ...]:
        """Inject several events in order; returns their traces (not handler follow-ups)."""
        start = len(self.history)
        for index, event in enumerate(events):
            try:
                self.inject(event)
            except McfsmError as err:
                raise SequenceError(index, err) from err
        return tuple(self.history[start:])


# -------------------------------------------------------- trace rendering


def _leaf(path: str) -> str:
    return path.rsplit("/", 1)[-1]


def _short_edge(edge_id: EdgeId) -> str:
    return f"{_leaf(edge_id.machine)}/{edge_id.hop_name}"


def trace_to_dict(trace: MacroStepTrace) -> dict:
    """JSON-ready view of a trace; field order: event, fired, pre, post, steps."""
    return {
        "event": trace.triggering_event.path,
        "fired": [e.path for e in trace.fired_edges],
        "pre": {_leaf(s.machine): s.name for s in trace.pre_state.states},
        "post": {_leaf(s.machine): s.name for s in trace.post_state.states},
        "steps": trace.step_count,
    }


def trace_to_json(trace: MacroStepTrace) -> str:
    """One compact JSON object per line."""
    return json.dumps(trace_to_dict(trace), separators=(",", ":"))


def trace_to_text(trace: MacroStepTrace) -> str:
    """Human-readable one-liner for CLI output."""
    fired = ", ".join(_short_edge(e) for e in trace.fired_edges)
    return (
        f"{_leaf(trace.triggering_event.path)}: {trace.pre_state} -> "
        f"{trace.post_state} [{fired}] steps={trace.step_count}"
    )
