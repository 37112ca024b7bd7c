"""Unit tests for the immutable model layer."""

import pytest

from mcfsm.errors import ModelError
from mcfsm.model import (
    EdgeId,
    ExternalEvent,
    GlobalState,
    InternalEvent,
    ResolvedEdge,
    ResolvedMachine,
    ResolvedModel,
    StateId,
    build_transition_table,
    initial_state,
    model_size,
    validate_state,
)


def make_machine(path, state_names, hops, start, class_name="Cls"):
    """Build a machine from (src, dst, captures) triples."""
    states = {n: StateId(path, n) for n in state_names}
    edges = []
    for src, dst, caps in hops:
        edges.append(
            ResolvedEdge(
                id=EdgeId(path, states[src], states[dst]),
                captures=tuple(caps),
                x_labels=frozenset(),
                y_labels=frozenset(),
            )
        )
    edges = tuple(edges)
    return ResolvedMachine(
        instance_path=path,
        class_name=class_name,
        states=tuple(states[n] for n in state_names),
        edges=edges,
        start=StateId(path, start),
        transition_table=build_transition_table(edges),
    )


@pytest.fixture
def toy_model():
    """Two machines: A toggles on xGo, B mirrors A's edges."""
    x_go = ExternalEvent("/M/xGo")
    a = make_machine(
        "/M/A",
        ["a0", "a1"],
        [("a0", "a1", [x_go]), ("a1", "a0", [x_go])],
        "a0",
    )
    a_edges = [InternalEvent(e.id) for e in a.edges]
    b = make_machine(
        "/M/B",
        ["b0", "b1"],
        [("b0", "b1", a_edges), ("b1", "b0", a_edges)],
        "b0",
    )
    return ResolvedModel(
        name="M",
        machines=(a, b),
        external_events=("/M/xGo",),
        dispatch_order=("/M/A", "/M/B"),
    )


class TestIds:
    def test_state_id_rejects_underscores(self):
        with pytest.raises(ModelError):
            StateId("/M/A", "a_0")

    def test_state_id_rejects_leading_digit(self):
        with pytest.raises(ModelError):
            StateId("/M/A", "0a")

    def test_edge_id_paths(self):
        e = EdgeId("/M/A", StateId("/M/A", "up"), StateId("/M/A", "down"))
        assert e.hop_name == "up_down"
        assert e.path == "/M/A/up_down"
        assert str(e) == "/M/A/up_down"

    def test_edge_id_rejects_foreign_states(self):
        with pytest.raises(ModelError):
            EdgeId("/M/A", StateId("/M/A", "up"), StateId("/M/B", "down"))

    def test_external_event_requires_x_prefix(self):
        assert ExternalEvent("/M/xGo").leaf == "xGo"
        with pytest.raises(ModelError):
            ExternalEvent("/M/go")

    def test_internal_event_path_is_the_edge_path(self):
        e = EdgeId("/M/A", StateId("/M/A", "up"), StateId("/M/A", "down"))
        assert InternalEvent(e).path == "/M/A/up_down"

    def test_ids_are_hashable_values(self):
        e1 = EdgeId("/M/A", StateId("/M/A", "up"), StateId("/M/A", "down"))
        e2 = EdgeId("/M/A", StateId("/M/A", "up"), StateId("/M/A", "down"))
        assert e1 == e2
        assert len({InternalEvent(e1), InternalEvent(e2)}) == 1


class TestEdges:
    def test_duplicate_captures_rejected(self):
        x = ExternalEvent("/M/xGo")
        with pytest.raises(ModelError):
            ResolvedEdge(
                id=EdgeId("/M/A", StateId("/M/A", "a"), StateId("/M/A", "b")),
                captures=(x, x),
                x_labels=frozenset(),
                y_labels=frozenset(),
            )

    def test_label_prefixes_enforced(self):
        eid = EdgeId("/M/A", StateId("/M/A", "a"), StateId("/M/A", "b"))
        with pytest.raises(ModelError):
            ResolvedEdge(id=eid, captures=(), x_labels=frozenset({"go"}), y_labels=frozenset())
        with pytest.raises(ModelError):
            ResolvedEdge(id=eid, captures=(), x_labels=frozenset(), y_labels=frozenset({"flip"}))


class TestTransitionTable:
    def test_conflicting_edges_rejected(self):
        x = ExternalEvent("/M/xGo")
        path = "/M/A"
        a, b, c = (StateId(path, n) for n in ("a", "b", "c"))
        edges = (
            ResolvedEdge(EdgeId(path, a, b), (x,), frozenset(), frozenset()),
            ResolvedEdge(EdgeId(path, a, c), (x,), frozenset(), frozenset()),
        )
        with pytest.raises(ModelError, match="nondeterministic"):
            build_transition_table(edges)

    def test_same_event_from_different_states_is_fine(self):
        x = ExternalEvent("/M/xGo")
        path = "/M/A"
        a, b = StateId(path, "a"), StateId(path, "b")
        edges = (
            ResolvedEdge(EdgeId(path, a, b), (x,), frozenset(), frozenset()),
            ResolvedEdge(EdgeId(path, b, a), (x,), frozenset(), frozenset()),
        )
        table = build_transition_table(edges)
        assert table[(a, x)] == edges[0].id
        assert table[(b, x)] == edges[1].id


class TestMachine:
    def test_start_must_be_declared(self):
        with pytest.raises(ModelError):
            make_machine("/M/A", ["a"], [], "b")

    def test_dispatch_lookup(self, toy_model):
        a = toy_model.machine("/M/A")
        hit = a.edge_for("a0", "/M/xGo")
        assert hit is not None and hit.id.hop_name == "a0_a1"
        assert a.edge_for("a1", "/M/nope") is None

    def test_state_accessor(self, toy_model):
        a = toy_model.machine("/M/A")
        assert a.state("a0") == StateId("/M/A", "a0")
        with pytest.raises(ModelError):
            a.state("zz")

    def test_leaf_name(self, toy_model):
        assert toy_model.machine("/M/B").name == "B"

    def test_duplicate_ordered_pair_rejected(self):
        x = ExternalEvent("/M/xGo")
        y = ExternalEvent("/M/xOther")
        with pytest.raises(ModelError, match="duplicate edge"):
            make_machine("/M/A", ["a", "b"], [("a", "b", [x]), ("a", "b", [y])], "a")


class TestModel:
    def test_machine_accessor(self, toy_model):
        assert toy_model.machine("/M/A").instance_path == "/M/A"
        with pytest.raises(ModelError):
            toy_model.machine("/M/C")

    def test_dispatch_order_must_cover_machines(self, toy_model):
        with pytest.raises(ModelError):
            ResolvedModel(
                name="M",
                machines=toy_model.machines,
                external_events=("/M/xGo",),
                dispatch_order=("/M/A",),
            )

    def test_captures_must_reference_known_events(self, toy_model):
        a = toy_model.machine("/M/A")
        stray = InternalEvent(EdgeId("/M/C", StateId("/M/C", "p"), StateId("/M/C", "q")))
        b_states = [StateId("/M/B", "b0"), StateId("/M/B", "b1")]
        bad_edges = (
            ResolvedEdge(EdgeId("/M/B", b_states[0], b_states[1]), (stray,), frozenset(), frozenset()),
        )
        bad_b = ResolvedMachine(
            instance_path="/M/B",
            class_name="Cls",
            states=tuple(b_states),
            edges=bad_edges,
            start=b_states[0],
            transition_table=build_transition_table(bad_edges),
        )
        with pytest.raises(ModelError, match="unknown edge"):
            ResolvedModel(
                name="M",
                machines=(a, bad_b),
                external_events=("/M/xGo",),
                dispatch_order=("/M/A", "/M/B"),
            )

    def test_event_enumeration_order(self, toy_model):
        paths = [e.path for e in toy_model.events()]
        assert paths == ["/M/xGo", "/M/A/a0_a1", "/M/A/a1_a0", "/M/B/b0_b1", "/M/B/b1_b0"]

    def test_size_and_initial(self, toy_model):
        assert model_size(toy_model) == (4, 4)
        init = initial_state(toy_model)
        assert init.assignment() == {"/M/A": "a0", "/M/B": "b0"}


class TestGlobalState:
    def test_replace_and_lookup(self, toy_model):
        init = initial_state(toy_model)
        a1 = toy_model.machine("/M/A").state("a1")
        moved = init.replace(a1)
        assert moved["/M/A"].name == "a1"
        assert moved["/M/B"].name == "b0"
        assert init["/M/A"].name == "a0"  # original untouched

    def test_str_uses_leaf_names(self, toy_model):
        assert str(initial_state(toy_model)) == "(A=a0, B=b0)"

    def test_validate_state(self, toy_model):
        init = initial_state(toy_model)
        validate_state(toy_model, init)
        foreign = GlobalState((StateId("/M/A", "a0"),))
        with pytest.raises(ModelError):
            validate_state(toy_model, foreign)
