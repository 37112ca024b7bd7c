"""Elaborated, immutable machine model shared by the runtime, analysis and code generators.

A model couples several finite state machines: every fired edge doubles as an
internal event (identified by its ordered state pair) that other machines in
the same model may capture. External events form the model's interface to the
outside world; their leaf identifiers are x-prefixed by convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

from .errors import ModelError

IDENTIFIER_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def is_identifier(text: str) -> bool:
    """letter (letter|digit)* — underscores are reserved for hop names."""
    return bool(text) and text[0] in IDENTIFIER_LETTERS and text.isalnum()


@dataclass(frozen=True, slots=True)
class StateId:
    """A state, addressed by its machine's instance path and a local name."""

    machine: str
    name: str

    def __post_init__(self):
        # Underscore-free names keep "hop src_dst" splits unambiguous.
        if not is_identifier(self.name):
            raise ModelError(f"invalid state name {self.name!r} (letters and digits only)")

    def __str__(self) -> str:
        return f"{self.machine}:{self.name}"


@dataclass(frozen=True, slots=True)
class EdgeId:
    """A directed edge; also the identity of the internal event it emits when fired."""

    machine: str
    src: StateId
    dst: StateId

    def __post_init__(self):
        if self.src.machine != self.machine or self.dst.machine != self.machine:
            raise ModelError(f"edge endpoints must belong to machine {self.machine}")

    @property
    def hop_name(self) -> str:
        return f"{self.src.name}_{self.dst.name}"

    @property
    def path(self) -> str:
        return f"{self.machine}/{self.hop_name}"

    def __str__(self) -> str:
        return self.path


@dataclass(frozen=True, slots=True)
class ExternalEvent:
    """A member of the model's external interface, e.g. ``/ComboSwitches/xPressS1``."""

    path: str

    def __post_init__(self):
        leaf = self.path.rsplit("/", 1)[-1]
        if not leaf.startswith("x"):
            raise ModelError(f"external event leaf must be x-prefixed: {self.path!r}")

    @property
    def leaf(self) -> str:
        return self.path.rsplit("/", 1)[-1]

    def __str__(self) -> str:
        return self.path


@dataclass(frozen=True, slots=True)
class InternalEvent:
    """The coupling event emitted when an edge fires: identified by the edge itself."""

    edge: EdgeId

    @property
    def path(self) -> str:
        return self.edge.path

    def __str__(self) -> str:
        return self.edge.path


EventRef = Union[ExternalEvent, InternalEvent]


@dataclass(frozen=True, slots=True)
class ResolvedEdge:
    """An edge with its resolved capture set and its semantic label groups."""

    id: EdgeId
    captures: tuple[EventRef, ...]
    x_labels: frozenset[str]
    y_labels: frozenset[str]

    def __post_init__(self):
        if len(set(self.captures)) != len(self.captures):
            raise ModelError(f"duplicate captures on edge {self.id}")
        for label in self.x_labels:
            if not label.startswith("x"):
                raise ModelError(f"x-label {label!r} on {self.id} lacks the x prefix")
        for label in self.y_labels:
            if not label.startswith("y"):
                raise ModelError(f"y-label {label!r} on {self.id} lacks the y prefix")


def build_transition_table(
    edges: Iterable[ResolvedEdge],
) -> dict[tuple[StateId, EventRef], EdgeId]:
    """Derive the (state, event) -> edge map, rejecting nondeterminism.

    Raises ModelError naming the first conflicting pair of edges.
    """
    table: dict[tuple[StateId, EventRef], EdgeId] = {}
    for edge in edges:
        for event in edge.captures:
            key = (edge.id.src, event)
            other = table.get(key)
            if other is not None and other != edge.id:
                raise ModelError(
                    f"nondeterministic state {edge.id.src}: event {event} triggers "
                    f"both {other.hop_name} and {edge.id.hop_name}"
                )
            table[key] = edge.id
    return table


@dataclass(frozen=True, eq=False)
class ResolvedMachine:
    """One machine instance: states, edges, start state, and its dispatch table."""

    instance_path: str
    class_name: str
    states: tuple[StateId, ...]
    edges: tuple[ResolvedEdge, ...]
    start: StateId
    transition_table: Mapping[tuple[StateId, EventRef], EdgeId] = field(repr=False)
    # internal indexes, derived in __post_init__
    _state_by_name: Mapping[str, StateId] = field(init=False, repr=False)
    _edge_by_id: Mapping[EdgeId, ResolvedEdge] = field(init=False, repr=False)
    _fast: Mapping[str, Mapping[str, ResolvedEdge]] = field(init=False, repr=False)

    def __post_init__(self):
        if self.start not in self.states:
            raise ModelError(f"start state {self.start} not declared in {self.instance_path}")
        names = {}
        for s in self.states:
            if s.machine != self.instance_path:
                raise ModelError(f"state {s} does not belong to {self.instance_path}")
            if s.name in names:
                raise ModelError(f"duplicate state name {s.name!r} in {self.instance_path}")
            names[s.name] = s
        seen_pairs = set()
        by_id = {}
        for e in self.edges:
            if e.id.machine != self.instance_path:
                raise ModelError(f"edge {e.id} does not belong to {self.instance_path}")
            pair = (e.id.src, e.id.dst)
            if pair in seen_pairs:
                raise ModelError(f"duplicate edge {e.id} (one edge per ordered state pair)")
            seen_pairs.add(pair)
            by_id[e.id] = e
        expected = build_transition_table(self.edges)
        if dict(self.transition_table) != expected:
            raise ModelError(f"transition table of {self.instance_path} disagrees with its edges")
        # event-path -> state-name -> edge; string keys keep the hot path cheap
        fast: dict[str, dict[str, ResolvedEdge]] = {}
        for e in self.edges:
            for ev in e.captures:
                fast.setdefault(ev.path, {})[e.id.src.name] = e
        object.__setattr__(self, "transition_table", MappingProxyType(dict(self.transition_table)))
        object.__setattr__(self, "_state_by_name", MappingProxyType(names))
        object.__setattr__(self, "_edge_by_id", MappingProxyType(by_id))
        object.__setattr__(self, "_fast", MappingProxyType({k: MappingProxyType(v) for k, v in fast.items()}))

    @property
    def name(self) -> str:
        """Leaf instance name, e.g. "S1" for "/ComboSwitches/S1"."""
        return self.instance_path.rsplit("/", 1)[-1]

    def state(self, name: str) -> StateId:
        try:
            return self._state_by_name[name]
        except KeyError:
            raise ModelError(f"no state {name!r} in {self.instance_path}") from None

    def has_state(self, name: str) -> bool:
        return name in self._state_by_name

    def edge(self, edge_id: EdgeId) -> ResolvedEdge:
        return self._edge_by_id[edge_id]

    def edge_for(self, state_name: str, event_path: str) -> ResolvedEdge | None:
        """Dispatch lookup: the unique enabled edge, or None when the event is ignored."""
        row = self._fast.get(event_path)
        if row is None:
            return None
        return row.get(state_name)


@dataclass(frozen=True, eq=False)
class ResolvedModel:
    """A fully elaborated model; deep-immutable, safe to share across threads."""

    name: str
    machines: tuple[ResolvedMachine, ...]
    external_events: tuple[str, ...]
    dispatch_order: tuple[str, ...]
    _machine_by_path: Mapping[str, ResolvedMachine] = field(init=False, repr=False)
    _dispatch_machines: tuple[ResolvedMachine, ...] = field(init=False, repr=False)

    def __post_init__(self):
        by_path = {m.instance_path: m for m in self.machines}
        if len(by_path) != len(self.machines):
            raise ModelError("duplicate machine instance paths")
        if sorted(self.dispatch_order) != sorted(by_path):
            raise ModelError("dispatch order must be a permutation of the machine paths")
        if len(set(self.external_events)) != len(self.external_events):
            raise ModelError("duplicate external event paths")
        known_edges = {e.id for m in self.machines for e in m.edges}
        externals = set(self.external_events)
        for m in self.machines:
            for e in m.edges:
                for ev in e.captures:
                    if isinstance(ev, ExternalEvent):
                        if ev.path not in externals:
                            raise ModelError(f"capture {ev} on {e.id} is not a declared external event")
                    elif ev.edge not in known_edges:
                        raise ModelError(f"capture {ev} on {e.id} references an unknown edge")
        object.__setattr__(self, "_machine_by_path", MappingProxyType(by_path))
        object.__setattr__(self, "_dispatch_machines", tuple(by_path[p] for p in self.dispatch_order))

    def machine(self, instance_path: str) -> ResolvedMachine:
        try:
            return self._machine_by_path[instance_path]
        except KeyError:
            raise ModelError(f"no machine {instance_path!r} in model {self.name}") from None

    def has_machine(self, instance_path: str) -> bool:
        return instance_path in self._machine_by_path

    @property
    def dispatch_machines(self) -> tuple[ResolvedMachine, ...]:
        """Machines in dispatch order (default: declaration order)."""
        return self._dispatch_machines

    def internal_events(self) -> Iterator[InternalEvent]:
        """All internal events, in machine then edge declaration order."""
        for m in self.machines:
            for e in m.edges:
                yield InternalEvent(e.id)

    def events(self) -> Iterator[EventRef]:
        """All events: externals in declaration order, then internals."""
        for path in self.external_events:
            yield ExternalEvent(path)
        yield from self.internal_events()


@dataclass(frozen=True, slots=True)
class GlobalState:
    """One state per machine, in model declaration order."""

    states: tuple[StateId, ...]

    def __getitem__(self, machine_path: str) -> StateId:
        for s in self.states:
            if s.machine == machine_path:
                return s
        raise KeyError(machine_path)

    def assignment(self) -> dict[str, str]:
        """instance path -> state name, in model order."""
        return {s.machine: s.name for s in self.states}

    def replace(self, new_state: StateId) -> "GlobalState":
        return GlobalState(tuple(new_state if s.machine == new_state.machine else s for s in self.states))

    def __str__(self) -> str:
        return "(" + ", ".join(f"{s.machine.rsplit('/', 1)[-1]}={s.name}" for s in self.states) + ")"


def initial_state(model: ResolvedModel) -> GlobalState:
    """The per-machine start states, in model order."""
    return GlobalState(tuple(m.start for m in model.machines))


def model_size(model: ResolvedModel) -> tuple[int, int]:
    """(total state count, total edge count) across all machines."""
    return (
        sum(len(m.states) for m in model.machines),
        sum(len(m.edges) for m in model.machines),
    )


def validate_state(model: ResolvedModel, state: GlobalState) -> None:
    """Check that a global state assigns exactly one declared state per machine."""
    if len(state.states) != len(model.machines):
        raise ModelError(
            f"global state has {len(state.states)} entries, model {model.name} has {len(model.machines)} machines"
        )
    for s, m in zip(state.states, model.machines):
        if s.machine != m.instance_path or not m.has_state(s.name):
            raise ModelError(f"state {s} does not belong to machine {m.instance_path}")
