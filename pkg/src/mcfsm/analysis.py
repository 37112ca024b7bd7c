"""Static analysis over resolved models.

Four instruments: the coupling graph (who can cause whom), worst-case cascade
bounds per external event, the exhaustive product automaton (which doubles as
the behavioral oracle and the state-explosion demonstrator), and reachability
with forbidden-state predicates. A generator for the n-switch / m-level
indicator family feeds the scaling tests.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import StateSpaceTooLarge, UnknownPath
from .model import (
    EdgeId,
    EventRef,
    ExternalEvent,
    GlobalState,
    InternalEvent,
    ResolvedModel,
    initial_state,
    model_size,
)
from .runtime import macro_step

DEFAULT_STATE_CAP = 1_000_000


# -------------------------------------------------------- coupling graph


@dataclass(frozen=True, eq=False)
class CouplingGraph:
    """Event causation graph: an arc e -> E for every edge E that captures e.

    Conservative over-approximation of runtime causation: whenever processing
    e can fire E (from any state), the arc is present.
    """

    model_name: str
    nodes: tuple[EventRef, ...]
    arcs: Mapping[EventRef, tuple[EdgeId, ...]]

    def arcs_from(self, event) -> tuple[EdgeId, ...]:
        if isinstance(event, str):
            for node in self.nodes:
                if node.path == event:
                    return self.arcs[node]
            raise UnknownPath(f"no event {event!r} in model {self.model_name}")
        return self.arcs.get(event, ())


def build_coupling_graph(model: ResolvedModel) -> CouplingGraph:
    nodes = tuple(model.events())
    arcs: dict[EventRef, list[EdgeId]] = {node: [] for node in nodes}
    for machine in model.machines:
        for edge in machine.edges:
            for captured in edge.captures:
                arcs[captured].append(edge.id)
    return CouplingGraph(
        model_name=model.name,
        nodes=nodes,
        arcs=MappingProxyType({k: tuple(v) for k, v in arcs.items()}),
    )


# -------------------------------------------------------- cascade bounds


@dataclass(frozen=True, slots=True)
class EventBound:
    """Worst-case cascade numbers for one external event.

    bound counts processed events (the trigger included); max_fired counts
    fired edges. bound=None means the event can reach a coupling cycle, in
    which case witness holds that cycle; otherwise witness is the longest
    causation chain.
    """

    event: str
    bound: int | None
    max_fired: int | None
    witness: tuple[str, ...]
    cycle: tuple[str, ...] | None


@dataclass(frozen=True, slots=True)
class BoundReport:
    model_name: str
    entries: tuple[EventBound, ...]

    @property
    def any_unbounded(self) -> bool:
        return any(e.bound is None for e in self.entries)

    def bound_for(self, name: str) -> EventBound:
        for entry in self.entries:
            if entry.event == name or entry.event.rsplit("/", 1)[-1] == name:
                return entry
        raise UnknownPath(f"no external event {name!r} in model {self.model_name}")


def cascade_bound(model: ResolvedModel) -> BoundReport:
    """Per external event: the worst-case processed-event count of one macro-step.

    Graph-theoretic and state-blind, hence conservative: during one popped
    event every machine fires at most one edge, so the cost of an event is
    1 plus, per machine, the costliest edge of that machine it can trigger.
    Any reachable cycle makes the verdict Unbounded.
    """
    graph = build_coupling_graph(model)
    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[str, int] = {}
    cost: dict[str, int | None] = {}
    depth: dict[str, int] = {}
    chain: dict[str, tuple[str, ...]] = {}
    cycle_w: dict[str, tuple[str, ...] | None] = {}
    stack: list[str] = []
    by_path = {node.path: node for node in graph.nodes}

    def visit(path: str):
        color[path] = GRAY
        stack.append(path)
        root_cycle: tuple[str, ...] | None = None
        per_machine: dict[str, int] = {}
        best_depth = 0
        best_chain: tuple[str, ...] = ()
        for edge in graph.arcs[by_path[path]]:
            child = edge.path
            status = color.get(child, WHITE)
            if status == GRAY:
                # back-arc onto the active path: a genuine directed cycle
                start = stack.index(child)
                if root_cycle is None:
                    root_cycle = tuple(stack[start:]) + (child,)
                continue
            if status == WHITE:
                visit(child)
            if cycle_w[child] is not None:
                if root_cycle is None:
                    root_cycle = cycle_w[child]
                continue
            child_cost = cost[child]
            if child_cost > per_machine.get(edge.machine, 0):
                per_machine[edge.machine] = child_cost
            if depth[child] > best_depth:
                best_depth = depth[child]
                best_chain = chain[child]
        cost[path] = None if root_cycle else 1 + sum(per_machine.values())
        depth[path] = 1 + best_depth
        chain[path] = (path,) + best_chain
        cycle_w[path] = root_cycle
        stack.pop()
        color[path] = BLACK

    entries = []
    for ext_path in model.external_events:
        if color.get(ext_path, WHITE) == WHITE:
            visit(ext_path)
        cyc = cycle_w[ext_path]
        bound = cost[ext_path]
        entries.append(
            EventBound(
                event=ext_path,
                bound=bound,
                max_fired=None if bound is None else bound - 1,
                witness=cyc if cyc is not None else chain[ext_path],
                cycle=cyc,
            )
        )
    return BoundReport(model_name=model.name, entries=tuple(entries))


def render_bound_report(report: BoundReport) -> str:
    lines = [f"model {report.model_name}"]
    for entry in report.entries:
        if entry.bound is None:
            lines.append(f"event {entry.event} unbounded")
            lines.append("  cycle: " + " -> ".join(entry.cycle))
        else:
            lines.append(f"event {entry.event} bound {entry.bound} fired {entry.max_fired}")
            lines.append("  longest chain: " + " -> ".join(entry.witness))
    return "\n".join(lines) + "\n"


# -------------------------------------------------------- product automaton


@dataclass(frozen=True, eq=False)
class ProductFsm:
    """The flat equivalent automaton over all global states.

    Built by running macro_step exhaustively from every global state, so its
    transition function is total over external events (self-loop when nothing
    fires). Covers unreachable global states too.
    """

    model_name: str
    states: tuple[GlobalState, ...]
    transitions: Mapping[tuple[GlobalState, str], GlobalState]
    initial: GlobalState
    external_events: tuple[str, ...]

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_transitions(self) -> int:
        return len(self.transitions)

    def step(self, state: GlobalState, event: str) -> GlobalState:
        path = event if event.startswith("/") else f"/{self.model_name}/{event}"
        try:
            return self.transitions[(state, path)]
        except KeyError:
            raise UnknownPath(f"no transition for {path!r} (unknown event or state)") from None

    def run(self, events: Iterable[str]) -> GlobalState:
        state = self.initial
        for event in events:
            state = self.step(state, event)
        return state


def expand_product(model: ResolvedModel, max_states: int = DEFAULT_STATE_CAP) -> ProductFsm:
    size = 1
    for machine in model.machines:
        size *= len(machine.states)
    if size > max_states:
        raise StateSpaceTooLarge(size, max_states)
    states = tuple(
        GlobalState(combo)
        for combo in itertools.product(*(m.states for m in model.machines))
    )
    transitions: dict[tuple[GlobalState, str], GlobalState] = {}
    for state in states:
        for ext_path in model.external_events:
            post, _ = macro_step(model, state, ext_path)
            transitions[(state, ext_path)] = post
    return ProductFsm(
        model_name=model.name,
        states=states,
        transitions=MappingProxyType(transitions),
        initial=initial_state(model),
        external_events=model.external_events,
    )


# -------------------------------------------------------- reachability


def _bfs(model: ResolvedModel, max_states: int):
    """Breadth-first exploration; returns (discovery order, parent links)."""
    init = initial_state(model)
    parents: dict[GlobalState, tuple[GlobalState, str] | None] = {init: None}
    order = [init]
    queue = deque([init])
    while queue:
        state = queue.popleft()
        for ext_path in model.external_events:
            post, _ = macro_step(model, state, ext_path)
            if post not in parents:
                if len(parents) >= max_states:
                    raise StateSpaceTooLarge(len(parents) + 1, max_states)
                parents[post] = (state, ext_path)
                order.append(post)
                queue.append(post)
    return tuple(order), parents


def reachable_states(
    model: ResolvedModel, max_states: int = DEFAULT_STATE_CAP
) -> tuple[GlobalState, ...]:
    """All global states reachable from the initial state, in BFS discovery order."""
    order, _ = _bfs(model, max_states)
    return order


def _resolve_predicate(model: ResolvedModel, predicate: Mapping[str, str]) -> dict[str, str]:
    """Normalize {machine: state} keys to instance paths, validating both sides."""
    resolved: dict[str, str] = {}
    for key, state_name in predicate.items():
        path = key if key.startswith("/") else f"/{model.name}/{key}"
        if not model.has_machine(path):
            raise UnknownPath(f"no machine {key!r} in model {model.name}")
        machine = model.machine(path)
        if not machine.has_state(state_name):
            raise UnknownPath(f"machine {key!r} has no state {state_name!r}")
        resolved[path] = state_name
    return resolved


def check_forbidden(
    model: ResolvedModel,
    predicate: Mapping[str, str],
    max_states: int = DEFAULT_STATE_CAP,
) -> tuple[bool, tuple[str, ...] | None]:
    """Can the model ever satisfy the conjunction {machine: state, ...}?

    Returns (holds_never, witness): holds_never is True when no reachable
    state satisfies the predicate; otherwise witness is a shortest external
    event sequence leading to a satisfying state (empty if the initial state
    already satisfies it).
    """
    wanted = _resolve_predicate(model, predicate)
    if not wanted:
        raise UnknownPath("empty predicate")
    order, parents = _bfs(model, max_states)
    for state in order:  # BFS order: first hit has a shortest path
        assignment = state.assignment()
        if all(assignment[path] == name for path, name in wanted.items()):
            witness: list[str] = []
            cursor = state
            while parents[cursor] is not None:
                prev, event = parents[cursor]
                witness.append(event)
                cursor = prev
            return False, tuple(reversed(witness))
    return True, None


# -------------------------------------------------------- family generator


def switch_family_source(n: int, m: int) -> str:
    """DSL source for n toggle switches driving one m-level cyclic indicator."""
    if n < 1:
        raise ValueError("need at least one switch")
    if m < 2:
        raise ValueError("the indicator needs at least two levels")
    lines = [
        'FSM class "Switch" {',
        "    hop up_down += xPress yFlip",
        "    hop down_up += xPress yFlip",
        "}",
        "",
        'FSM class "Indicator" {',
    ]
    for level in range(m):
        lines.append(f"    hop q{level}_q{(level + 1) % m} += xStep")
    lines.append("}")
    lines.append("")
    lines.append('McFSM class "SwitchBank" {')
    for i in range(1, n + 1):
        lines.append(f"    Switch inst S{i} {{")
        lines.append("        Start: up")
        lines.append(f"        cap &xPress += ../xPressS{i}")
        lines.append("    }")
    lines.append("    Indicator inst Ind {")
    lines.append("        Start: q0")
    lines.append("        cap &xStep += ../S*/yFlip")
    lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def generate_switch_family(n: int, m: int) -> ResolvedModel:
    """Elaborated n-switch, m-level model; model_size is (2n+m, 2n+m) by construction."""
    from .dsl import compile_model

    return compile_model(switch_family_source(n, m), "SwitchBank", filename=f"<family n={n} m={m}>")


# -------------------------------------------------------- DOT rendering


def _quote(text: str) -> str:
    return '"' + text.replace('"', '\\"') + '"'


def _leaf(path: str) -> str:
    return path.rsplit("/", 1)[-1]


def _short_event(event: EventRef) -> str:
    if isinstance(event, InternalEvent):
        return f"{_leaf(event.edge.machine)}/{event.edge.hop_name}"
    return _leaf(event.path)


def to_dot(obj) -> str:
    """Graphviz text for a ResolvedModel, ProductFsm or CouplingGraph."""
    if isinstance(obj, ResolvedModel):
        return _model_dot(obj)
    if isinstance(obj, ProductFsm):
        return _product_dot(obj)
    if isinstance(obj, CouplingGraph):
        return _coupling_dot(obj)
    raise TypeError(f"cannot render {type(obj).__name__} as DOT")


def _model_dot(model: ResolvedModel) -> str:
    lines = [f"digraph {_quote(model.name)} {{", "  rankdir=LR;"]
    for index, machine in enumerate(model.machines):
        name = _leaf(machine.instance_path)
        lines.append(f"  subgraph cluster_{index} {{")
        lines.append(f"    label={_quote(name)};")
        for state in machine.states:
            node = f"{name}.{state.name}"
            shape = "doublecircle" if state == machine.start else "circle"
            lines.append(f"    {_quote(node)} [shape={shape},label={_quote(state.name)}];")
        for edge in machine.edges:
            parts = [", ".join(_short_event(ev) for ev in edge.captures) or "-"]
            if edge.y_labels:
                parts.append(", ".join(sorted(edge.y_labels)))
            label = "\\n".join(parts)
            src = f"{name}.{edge.id.src.name}"
            dst = f"{name}.{edge.id.dst.name}"
            lines.append(f"    {_quote(src)} -> {_quote(dst)} [label={_quote(label)}];")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _product_dot(product: ProductFsm) -> str:
    lines = [f"digraph {_quote(product.model_name + '_product')} {{", "  rankdir=LR;"]

    def node(state: GlobalState) -> str:
        return ",".join(s.name for s in state.states)

    for state in product.states:
        shape = "doublecircle" if state == product.initial else "circle"
        lines.append(f"  {_quote(node(state))} [shape={shape}];")
    for state in product.states:
        for ext_path in product.external_events:
            post = product.transitions[(state, ext_path)]
            lines.append(
                f"  {_quote(node(state))} -> {_quote(node(post))} [label={_quote(_leaf(ext_path))}];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _coupling_dot(graph: CouplingGraph) -> str:
    lines = [f"digraph {_quote(graph.model_name + '_coupling')} {{", "  rankdir=LR;"]
    for node in graph.nodes:
        shape = "box" if isinstance(node, ExternalEvent) else "ellipse"
        lines.append(f"  {_quote(_short_event(node))} [shape={shape}];")
    for node in graph.nodes:
        for edge in graph.arcs[node]:
            target = _short_event(InternalEvent(edge))
            lines.append(f"  {_quote(_short_event(node))} -> {_quote(target)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
