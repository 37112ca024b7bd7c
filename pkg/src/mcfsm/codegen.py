"""Artifact emission: flat transition tables and generated source backends.

The flat table is the primary artifact. It assigns dense integer ids to
every event (externals first, in declaration order, then one internal id
per edge in machine/edge declaration order) and serializes states, edges,
capture sets, and dispatch order in a line-oriented text format. Emission
is byte-deterministic; see docs/formats.md for the exact layout.

Source backends are templates over the same id assignment. One backend
ships: portable C with a table-driven event loop.
"""

from __future__ import annotations

from .errors import ModelError, TableFormatError, UnknownBackend
from .model import (
    EdgeId,
    EventRef,
    ExternalEvent,
    InternalEvent,
    ResolvedEdge,
    ResolvedMachine,
    ResolvedModel,
    StateId,
    build_transition_table,
)

TABLE_HEADER = "MCFSM-TABLE v1"


def event_index(model: ResolvedModel) -> dict[str, int]:
    """Dense event ids keyed by path: externals first, then edge events."""
    index: dict[str, int] = {}
    for path in model.external_events:
        index[path] = len(index)
    for machine in model.machines:
        for edge in machine.edges:
            index[edge.id.path] = len(index)
    return index


def _event_path(event: EventRef) -> str:
    if isinstance(event, ExternalEvent):
        return event.path
    return event.edge.path


# ---------------------------------------------------------------------------
# flat table


def emit_table(model: ResolvedModel) -> bytes:
    index = event_index(model)
    n_external = len(model.external_events)
    lines = [TABLE_HEADER, f"model {model.name}"]
    lines.append(f"events {n_external} {len(index) - n_external}")
    for path, gid in index.items():
        kind = "ext" if gid < n_external else "int"
        lines.append(f"event {gid} {kind} {path}")
    for mid, machine in enumerate(model.machines):
        state_ids = {state.name: sid for sid, state in enumerate(machine.states)}
        lines.append(
            f"machine {mid} {machine.instance_path} class {machine.class_name}"
            f" start {state_ids[machine.start.name]}"
            f" states {len(machine.states)} edges {len(machine.edges)}"
        )
        for sid, state in enumerate(machine.states):
            lines.append(f"state {sid} {state.name}")
        for edge in machine.edges:
            captures = sorted(index[_event_path(ev)] for ev in edge.captures)
            lines.append(
                f"edge {index[edge.id.path]} {state_ids[edge.id.src.name]}"
                f" {state_ids[edge.id.dst.name]} captures {len(captures)}"
                + "".join(f" {gid}" for gid in captures)
            )
    order = {m.instance_path: i for i, m in enumerate(model.machines)}
    lines.append("dispatch" + "".join(f" {order[p]}" for p in model.dispatch_order))
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("utf-8")


class _TableReader:
    def __init__(self, data: bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TableFormatError(f"table is not valid UTF-8: {exc}") from None
        self.lines = text.splitlines()
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise TableFormatError(f"line {self.pos + 1}: unexpected end of table")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def fail(self, message: str) -> TableFormatError:
        return TableFormatError(f"line {self.pos}: {message}")


def _int_fields(reader: _TableReader, fields: list[str], positions: list[int]) -> list[int]:
    values = []
    for i in positions:
        try:
            values.append(int(fields[i]))
        except (IndexError, ValueError):
            raise reader.fail(f"expected integer field at position {i}") from None
    return values


def parse_table(data: bytes) -> ResolvedModel:
    """Reconstruct a model from flat-table bytes.

    Edge labels are not part of the table, so the result carries empty
    label sets; transition behavior is otherwise identical.
    """
    reader = _TableReader(data)
    if reader.next() != TABLE_HEADER:
        raise reader.fail(f"expected header {TABLE_HEADER!r}")
    fields = reader.next().split()
    if len(fields) != 2 or fields[0] != "model":
        raise reader.fail("expected 'model <name>'")
    model_name = fields[1]

    fields = reader.next().split()
    if len(fields) != 3 or fields[0] != "events":
        raise reader.fail("expected 'events <n-external> <n-internal>'")
    n_external, n_internal = _int_fields(reader, fields, [1, 2])

    events: list[EventRef] = []
    for gid in range(n_external + n_internal):
        fields = reader.next().split()
        if len(fields) != 4 or fields[0] != "event":
            raise reader.fail("expected 'event <id> <ext|int> <path>'")
        if int(fields[1]) != gid:
            raise reader.fail(f"event ids must be dense, expected {gid}")
        kind, path = fields[2], fields[3]
        if kind == "ext":
            if gid >= n_external:
                raise reader.fail("external event after internal section")
            events.append(ExternalEvent(path))
        elif kind == "int":
            machine_path, _, hop = path.rpartition("/")
            src, _, dst = hop.partition("_")
            if not (machine_path and src and dst):
                raise reader.fail(f"malformed internal event path {path!r}")
            events.append(InternalEvent(EdgeId(
                machine_path, StateId(machine_path, src), StateId(machine_path, dst)
            )))
        else:
            raise reader.fail(f"unknown event kind {kind!r}")

    machines: list[ResolvedMachine] = []
    line = reader.next()
    while line.startswith("machine "):
        fields = line.split()
        if len(fields) != 11 or fields[3] != "class" or fields[5] != "start" \
                or fields[7] != "states" or fields[9] != "edges":
            raise reader.fail(
                "expected 'machine <id> <path> class <c> start <s> states <n> edges <n>'"
            )
        mid, start_sid, n_states, n_edges = _int_fields(reader, fields, [1, 6, 8, 10])
        path, class_name = fields[2], fields[4]
        if mid != len(machines):
            raise reader.fail(f"machine ids must be dense, expected {len(machines)}")

        states: list[StateId] = []
        for sid in range(n_states):
            fields = reader.next().split()
            if len(fields) != 3 or fields[0] != "state" or int(fields[1]) != sid:
                raise reader.fail(f"expected 'state {sid} <name>'")
            states.append(StateId(path, fields[2]))
        if not 0 <= start_sid < n_states:
            raise reader.fail(f"start id {start_sid} out of range")

        edges: list[ResolvedEdge] = []
        for _ in range(n_edges):
            fields = reader.next().split()
            if len(fields) < 5 or fields[0] != "edge" or fields[4] != "captures":
                raise reader.fail("expected 'edge <id> <src> <dst> captures <k> ...'")
            gid, src_sid, dst_sid, n_caps = _int_fields(reader, fields, [1, 2, 3, 5])
            if not (0 <= gid < len(events) and isinstance(events[gid], InternalEvent)):
                raise reader.fail(f"edge id {gid} is not an internal event id")
            if len(fields) != 6 + n_caps:
                raise reader.fail(f"expected {n_caps} capture ids")
            if not (0 <= src_sid < n_states and 0 <= dst_sid < n_states):
                raise reader.fail("edge endpoint out of range")
            edge_id = events[gid].edge
            if (edge_id.machine, edge_id.src.name, edge_id.dst.name) != (
                path, states[src_sid].name, states[dst_sid].name
            ):
                raise reader.fail(f"edge id {gid} does not match its event declaration")
            captures = []
            for cap in _int_fields(reader, fields, list(range(6, 6 + n_caps))):
                if not 0 <= cap < len(events):
                    raise reader.fail(f"capture id {cap} out of range")
                captures.append(events[cap])
            edges.append(ResolvedEdge(
                id=edge_id, captures=tuple(captures),
                x_labels=frozenset(), y_labels=frozenset(),
            ))

        machines.append(ResolvedMachine(
            instance_path=path,
            class_name=class_name,
            states=tuple(states),
            edges=tuple(edges),
            start=states[start_sid],
            transition_table=build_transition_table(edges),
        ))
        line = reader.next()

    fields = line.split()
    if fields[0] != "dispatch":
        raise reader.fail("expected 'dispatch <machine-ids>'")
    mids = _int_fields(reader, fields, list(range(1, len(fields))))
    if sorted(mids) != list(range(len(machines))):
        raise reader.fail("dispatch list must be a permutation of machine ids")
    if reader.next() != "end":
        raise reader.fail("expected 'end'")

    externals = tuple(ev.path for ev in events[:n_external])
    try:
        return ResolvedModel(
            name=model_name,
            machines=tuple(machines),
            external_events=externals,
            dispatch_order=tuple(machines[mid].instance_path for mid in mids),
        )
    except ModelError as exc:
        raise TableFormatError(f"inconsistent table: {exc}") from None


# ---------------------------------------------------------------------------
# source backends


def _c_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _emit_c(model: ResolvedModel) -> str:
    index = event_index(model)
    n_events = len(index)
    n_external = len(model.external_events)
    n_machines = len(model.machines)

    state_base: list[int] = []
    total_states = 0
    for machine in model.machines:
        state_base.append(total_states)
        total_states += len(machine.states)

    # trans[(state_base[m] + local_state) * n_events + event] = fired gid or -1
    trans = [-1] * (total_states * n_events)
    edge_dst: list[int] = []
    for mid, machine in enumerate(model.machines):
        local = {state.name: sid for sid, state in enumerate(machine.states)}
        for edge in machine.edges:
            gid = index[edge.id.path]
            assert gid - n_external == len(edge_dst)
            edge_dst.append(local[edge.id.dst.name])
            row = state_base[mid] + local[edge.id.src.name]
            for captured in edge.captures:
                trans[row * n_events + index[_event_path(captured)]] = gid

    def int_rows(values: list[int], per_line: int = 16) -> str:
        chunks = [values[i:i + per_line] for i in range(0, len(values), per_line)]
        return ",\n    ".join(", ".join(str(v) for v in chunk) for chunk in chunks)

    starts = [
        {s.name: i for i, s in enumerate(m.states)}[m.start.name]
        for m in model.machines
    ]
    event_names = ",\n    ".join(
        f'"{_c_escape(path)}"' for path in index
    )
    dispatch = [
        [m.instance_path for m in model.machines].index(path)
        for path in model.dispatch_order
    ]

    return f"""/* Table-driven event dispatcher for model "{_c_escape(model.name)}".
 *
 * Generated file; do not edit. The state vector is one uint16_t local
 * state id per machine, in declaration order. Event ids are dense:
 * 0..{n_external - 1} external, {n_external}..{n_events - 1} internal (one per edge).
 *
 * mcfsm_step processes one external event to quiescence and returns the
 * number of events consumed, or -1 when MCFSM_CASCADE_CAP would be
 * exceeded (the state buffer then holds a partial result and must be
 * discarded), or -2 for an out-of-range event id.
 */
#include <stdint.h>
#include <stddef.h>

#define MCFSM_N_MACHINES {n_machines}
#define MCFSM_N_EVENTS {n_events}
#define MCFSM_N_EXTERNAL {n_external}
#define MCFSM_N_STATES {total_states}
#ifndef MCFSM_CASCADE_CAP
#define MCFSM_CASCADE_CAP 10000
#endif
#define MCFSM_QUEUE_CAP (MCFSM_CASCADE_CAP * MCFSM_N_MACHINES + 1)

static const uint16_t mcfsm_start[MCFSM_N_MACHINES] = {{
    {int_rows(starts)}
}};

static const uint16_t mcfsm_state_base[MCFSM_N_MACHINES] = {{
    {int_rows(state_base)}
}};

static const uint16_t mcfsm_dispatch[MCFSM_N_MACHINES] = {{
    {int_rows(dispatch)}
}};

/* next local state for each internal event id - MCFSM_N_EXTERNAL */
static const uint16_t mcfsm_edge_dst[MCFSM_N_EVENTS - MCFSM_N_EXTERNAL] = {{
    {int_rows(edge_dst)}
}};

/* row = mcfsm_state_base[machine] + local state; column = event id;
 * value = fired internal event id, or -1 when the machine ignores it */
static const int32_t mcfsm_trans[MCFSM_N_STATES * MCFSM_N_EVENTS] = {{
    {int_rows(trans)}
}};

const char *const mcfsm_event_names[MCFSM_N_EVENTS] = {{
    {event_names}
}};

static uint16_t mcfsm_queue[MCFSM_QUEUE_CAP];

void mcfsm_init(uint16_t *state)
{{
    size_t i;
    for (i = 0; i < MCFSM_N_MACHINES; i++)
        state[i] = mcfsm_start[i];
}}

int mcfsm_step(uint16_t *state, uint16_t event_id)
{{
    uint32_t head = 0, tail = 0;
    int processed = 0;
    size_t i;

    if (event_id >= MCFSM_N_EVENTS)
        return -2;
    mcfsm_queue[tail++] = event_id;
    while (head < tail) {{
        uint16_t ev;
        if (processed >= MCFSM_CASCADE_CAP)
            return -1;
        ev = mcfsm_queue[head++];
        processed++;
        for (i = 0; i < MCFSM_N_MACHINES; i++) {{
            uint16_t m = mcfsm_dispatch[i];
            int32_t fired = mcfsm_trans[
                (uint32_t)(mcfsm_state_base[m] + state[m]) * MCFSM_N_EVENTS + ev];
            if (fired >= 0) {{
                state[m] = mcfsm_edge_dst[fired - MCFSM_N_EXTERNAL];
                mcfsm_queue[tail++] = (uint16_t)fired;
            }}
        }}
    }}
    return processed;
}}
"""


_BACKENDS = {"c": _emit_c}


def backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def emit_source(model: ResolvedModel, backend: str) -> str:
    try:
        emitter = _BACKENDS[backend]
    except KeyError:
        raise UnknownBackend(backend, backends()) from None
    return emitter(model)
