"""Frontend tests: lexing, parsing, selector resolution, elaboration.

The two-switch reference model is checked against a hand-written resolution
table (EXPECTED_CAPTURES below) that was worked out by hand from the selector
rules, independently of the implementation.
"""

import pytest

from mcfsm.dsl import (
    Ast,
    Elaborator,
    FsmClassDecl,
    McfsmClassDecl,
    compile_model,
    elaborate,
    parse,
    tokenize,
)
from mcfsm.errors import ElaborationError, ParseError
from mcfsm.model import ExternalEvent, InternalEvent, model_size

# hand-derived: who captures what, in resolution order
EXPECTED_CAPTURES = {
    "/ComboSwitches/S1/up_down": ["/ComboSwitches/xPressS1"],
    "/ComboSwitches/S1/down_up": ["/ComboSwitches/xPressS1"],
    "/ComboSwitches/S2/up_down": ["/ComboSwitches/xPressS2"],
    "/ComboSwitches/S2/down_up": ["/ComboSwitches/xPressS2"],
    "/ComboSwitches/Lights/green_yellow": [
        "/ComboSwitches/S1/up_down",
        "/ComboSwitches/S1/down_up",
        "/ComboSwitches/S2/up_down",
        "/ComboSwitches/S2/down_up",
    ],
    "/ComboSwitches/Lights/yellow_red": [
        "/ComboSwitches/S1/up_down",
        "/ComboSwitches/S1/down_up",
        "/ComboSwitches/S2/up_down",
        "/ComboSwitches/S2/down_up",
    ],
    "/ComboSwitches/Lights/red_green": [
        "/ComboSwitches/S1/up_down",
        "/ComboSwitches/S1/down_up",
        "/ComboSwitches/S2/up_down",
        "/ComboSwitches/S2/down_up",
    ],
}


def codes_of(err: ElaborationError) -> list[str]:
    return [d.code for d in err.diagnostics]


def elaboration_codes(source: str, class_name: str | None = None) -> list[str]:
    with pytest.raises(ElaborationError) as exc_info:
        compile_model(source, class_name)
    return codes_of(exc_info.value)


class TestLexer:
    def test_token_stream(self):
        toks = tokenize('hop up_down += xPress yFlip\n')
        kinds = [t.kind for t in toks]
        assert kinds == ["WORD", "WORD", "PLUSEQ", "WORD", "WORD", "NEWLINE", "EOF"]
        assert toks[1].text == "up_down"
        assert toks[0].line == 1 and toks[0].col == 1

    def test_comments_and_blank_lines_vanish(self):
        toks = tokenize("# intro\n\n  # indented\nx\n")
        assert [t.kind for t in toks] == ["WORD", "NEWLINE", "EOF"]

    def test_string_token(self):
        toks = tokenize('FSM class "Switch" {')
        assert toks[2].kind == "STRING" and toks[2].text == "Switch"

    def test_lone_plus_rejected(self):
        with pytest.raises(ParseError):
            tokenize("hop a_b + x")

    def test_unterminated_string(self):
        with pytest.raises(ParseError):
            tokenize('FSM class "Oops {')

    def test_stray_character(self):
        with pytest.raises(ParseError) as exc_info:
            tokenize("hop a_b += x;")
        assert exc_info.value.line == 1 and exc_info.value.col == 13


class TestParser:
    def test_reference_source_shape(self, combo_ast):
        assert isinstance(combo_ast, Ast)
        assert [c.name for c in combo_ast.classes] == ["HealthSignal", "Switch", "ComboSwitches"]
        health, switch, combo = combo_ast.classes
        assert isinstance(health, FsmClassDecl)
        assert [h.name for h in health.hops] == ["green_yellow", "yellow_red", "red_green"]
        assert health.hops[0].labels == ("xFlip", "yYellow")
        assert isinstance(combo, McfsmClassDecl)
        assert [i.name for i in combo.instances] == ["S1", "S2", "Lights"]
        assert combo.instances[0].class_name == "Switch"
        assert combo.instances[0].start == "up"
        assert combo.instances[2].start == "yellow"
        assert len(combo.instances[2].caps) == 1
        cap = combo.instances[2].caps[0]
        assert cap.selector.kind == "semantic" and cap.selector.text == "&xFlip"
        assert [t.text for t in cap.targets] == ["../S*/yFlip"]
        assert cap.targets[0].kind == "glob"

    def test_empty_source(self):
        assert parse("").classes == ()
        assert parse("# only comments\n").classes == ()

    def test_empty_label_list(self):
        with pytest.raises(ParseError, match="at least one label"):
            parse('FSM class "X" { hop a_b += }')

    def test_empty_cap_targets(self):
        src = 'FSM class "X" { hop a_b += xGo }\nMcFSM class "M" { X inst I { \n Start: a \n cap &xGo += \n } }'
        with pytest.raises(ParseError, match="at least one event reference"):
            parse(src)

    def test_bad_hop_name(self):
        with pytest.raises(ParseError, match="src_dst"):
            parse('FSM class "X" { hop a_b_c += xGo }')
        with pytest.raises(ParseError, match="src_dst"):
            parse('FSM class "X" { hop ab += xGo }')

    def test_duplicate_class_name(self):
        with pytest.raises(ParseError, match="duplicate class"):
            parse('FSM class "X" { hop a_b += xGo }\nFSM class "X" { hop a_b += xGo }')

    def test_duplicate_instance_name(self):
        src = (
            'FSM class "X" { hop a_b += xGo }\n'
            'McFSM class "M" { X inst I { \n Start: a \n } \n X inst I { \n Start: a \n } }'
        )
        with pytest.raises(ParseError, match="duplicate instance"):
            parse(src)

    def test_duplicate_start(self):
        src = 'FSM class "X" { hop a_b += xGo }\nMcFSM class "M" { X inst I { \n Start: a \n Start: b \n } }'
        with pytest.raises(ParseError, match="duplicate Start"):
            parse(src)

    def test_bare_word_selector_rejected(self):
        src = 'FSM class "X" { hop a_b += xGo }\nMcFSM class "M" { X inst I { \n Start: a \n cap a_b += ../xGo \n } }'
        with pytest.raises(ParseError, match="selector"):
            parse(src)

    def test_selector_kinds(self, combo_ast):
        combo = combo_ast.classes[2]
        s1_cap = combo.instances[0].caps[0]
        assert s1_cap.selector.kind == "semantic"
        assert s1_cap.targets[0].kind == "relative"

    def test_statements_need_line_breaks(self):
        with pytest.raises(ParseError, match="end of statement"):
            parse('FSM class "X" { hop a_b += xGo hop b_a += xGo }')


class TestReferenceElaboration:
    """The hand-resolution oracle for the two-switch model."""

    def test_machines_and_order(self, combo_model):
        assert combo_model.name == "ComboSwitches"
        assert [m.instance_path for m in combo_model.machines] == [
            "/ComboSwitches/S1",
            "/ComboSwitches/S2",
            "/ComboSwitches/Lights",
        ]
        assert combo_model.dispatch_order == tuple(m.instance_path for m in combo_model.machines)
        assert [m.class_name for m in combo_model.machines] == ["Switch", "Switch", "HealthSignal"]

    def test_size(self, combo_model):
        assert model_size(combo_model) == (7, 7)

    def test_states_and_starts(self, combo_model):
        s1 = combo_model.machine("/ComboSwitches/S1")
        assert [s.name for s in s1.states] == ["up", "down"]
        assert s1.start.name == "up"
        lights = combo_model.machine("/ComboSwitches/Lights")
        assert [s.name for s in lights.states] == ["green", "yellow", "red"]
        assert lights.start.name == "yellow"

    def test_external_events(self, combo_model):
        assert combo_model.external_events == (
            "/ComboSwitches/xPressS1",
            "/ComboSwitches/xPressS2",
        )

    def test_captures_match_hand_table(self, combo_model):
        actual = {}
        for machine in combo_model.machines:
            for edge in machine.edges:
                actual[edge.id.path] = [ev.path for ev in edge.captures]
        assert actual == EXPECTED_CAPTURES

    def test_capture_kinds(self, combo_model):
        s1 = combo_model.machine("/ComboSwitches/S1")
        assert all(isinstance(ev, ExternalEvent) for e in s1.edges for ev in e.captures)
        lights = combo_model.machine("/ComboSwitches/Lights")
        assert all(isinstance(ev, InternalEvent) for e in lights.edges for ev in e.captures)

    def test_each_light_edge_has_four_internal_captures(self, combo_model):
        lights = combo_model.machine("/ComboSwitches/Lights")
        assert len(lights.edges) == 3
        for edge in lights.edges:
            internal = [ev for ev in edge.captures if isinstance(ev, InternalEvent)]
            assert len(internal) == 4

    def test_labels_survive(self, combo_model):
        s1 = combo_model.machine("/ComboSwitches/S1")
        assert s1.edges[0].x_labels == frozenset({"xPress"})
        assert s1.edges[0].y_labels == frozenset({"yFlip"})
        lights = combo_model.machine("/ComboSwitches/Lights")
        assert lights.edges[1].y_labels == frozenset({"yRed"})

    def test_elaboration_is_deterministic(self, combo_source):
        first = compile_model(combo_source, "ComboSwitches")
        second = compile_model(combo_source, "ComboSwitches")
        snap = lambda m: [
            (mach.instance_path, [(e.id.path, [ev.path for ev in e.captures]) for e in mach.edges])
            for mach in m.machines
        ]
        assert snap(first) == snap(second)
        assert first.external_events == second.external_events

    def test_provenance_covers_every_capture(self, combo_ast):
        elab = Elaborator(combo_ast)
        model = elab.elaborate("ComboSwitches")
        for machine in model.machines:
            for edge in machine.edges:
                for ev in edge.captures:
                    assert (edge.id, ev) in elab.provenance


class TestSelectorResolution:
    def test_semantic_ref_selects_own_edges(self, combo_model):
        s1 = combo_model.machine("/ComboSwitches/S1")
        # &xPress resolved to both edges: both ended up capturing xPressS1
        assert [e.id.hop_name for e in s1.edges if e.captures] == ["up_down", "down_up"]

    def test_absolute_paths(self):
        src = (
            'FSM class "Sw" { hop u_d += xP yF \n hop d_u += xP yF }\n'
            'McFSM class "AbsM" {\n'
            '  Sw inst A { \n Start: u \n cap &xP += /AbsM/xGo \n }\n'
            '  Sw inst B { \n Start: u \n cap /AbsM/A/u_d += ../xOther \n }\n'
            "}"
        )
        model = compile_model(src, "AbsM")
        a = model.machine("/AbsM/A")
        assert [ev.path for ev in a.edges[0].captures] == ["/AbsM/xGo", "/AbsM/xOther"]
        assert model.external_events == ("/AbsM/xGo", "/AbsM/xOther")
        b = model.machine("/AbsM/B")
        assert all(not e.captures for e in b.edges)

    def test_absolute_path_with_wrong_root(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xP += /Other/xGo \n } }'
        )
        assert elaboration_codes(src, "M") == ["unknown-path"]

    def test_hop_name_glob(self):
        src = (
            'FSM class "Sw" { hop u_d += xP \n hop d_u += xQ }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap u_* += ../xGo \n } }'
        )
        model = compile_model(src, "M")
        a = model.machine("/M/A")
        assert [ev.path for ev in a.edges[0].captures] == ["/M/xGo"]
        assert not a.edges[1].captures

    def test_label_glob_selects_by_label(self):
        src = (
            'FSM class "Sw" { hop u_d += xP yOut \n hop d_u += xQ }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap yO* += ../xGo \n } }'
        )
        model = compile_model(src, "M")
        a = model.machine("/M/A")
        assert [ev.path for ev in a.edges[0].captures] == ["/M/xGo"]

    def test_glob_target_ordering_follows_declaration(self, combo_model):
        lights = combo_model.machine("/ComboSwitches/Lights")
        assert [ev.path for ev in lights.edges[0].captures] == EXPECTED_CAPTURES[
            "/ComboSwitches/Lights/green_yellow"
        ]

    def test_duplicate_targets_keep_first(self):
        src = (
            'FSM class "Sw" { hop u_d += xP yF }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xP += ../xGo ../xGo /M/xGo \n } }'
        )
        model = compile_model(src, "M")
        a = model.machine("/M/A")
        assert [ev.path for ev in a.edges[0].captures] == ["/M/xGo"]

    def test_empty_glob_is_an_error(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xP += ../Z*/yF \n } }'
        )
        assert elaboration_codes(src, "M") == ["empty-glob-match"]

    def test_unknown_relative_path(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xP += ../B/yF \n } }'
        )
        assert elaboration_codes(src, "M") == ["unknown-path"]

    def test_too_many_ups(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xP += ../../xGo \n } }'
        )
        assert elaboration_codes(src, "M") == ["unknown-path"]

    def test_path_below_an_edge(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xP += ../A/u_d/deep \n } }'
        )
        assert elaboration_codes(src, "M") == ["unknown-path"]

    def test_external_leaf_must_be_x_prefixed(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xP += ../go \n } }'
        )
        assert elaboration_codes(src, "M") == ["unknown-path"]

    def test_selector_matching_external_is_not_an_edge(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap ../xHit += ../xGo \n } }'
        )
        assert elaboration_codes(src, "M") == ["not-an-edge"]

    def test_instance_target_is_not_an_event(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xP += ../A \n } }'
        )
        assert elaboration_codes(src, "M") == ["not-an-event"]

    def test_instance_glob_selector_is_not_an_edge(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap ../A* += ../xGo \n } }'
        )
        assert elaboration_codes(src, "M") == ["not-an-edge"]

    def test_unknown_semantic_label(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n cap &xNope += ../xGo \n } }'
        )
        assert elaboration_codes(src, "M") == ["unknown-path"]


class TestElaborationDiagnostics:
    def test_missing_start(self):
        src = 'FSM class "Sw" { hop u_d += xP }\nMcFSM class "M" { Sw inst A { \n cap &xP += ../xGo \n } }'
        assert "missing-start" in elaboration_codes(src, "M")

    def test_unknown_start_state(self):
        src = 'FSM class "Sw" { hop u_d += xP }\nMcFSM class "M" { Sw inst A { \n Start: sideways \n } }'
        assert elaboration_codes(src, "M") == ["unknown-start-state"]

    def test_underscore_in_start_state(self):
        src = 'FSM class "Sw" { hop u_d += xP }\nMcFSM class "M" { Sw inst A { \n Start: si_de \n } }'
        assert elaboration_codes(src, "M") == ["underscore-in-state-name"]

    def test_invalid_label(self):
        src = 'FSM class "Sw" { hop u_d += Flip }\nMcFSM class "M" { Sw inst A { \n Start: u \n } }'
        assert elaboration_codes(src, "M") == ["invalid-label"]

    def test_unknown_fsm_class(self):
        src = 'McFSM class "M" { Ghost inst A { \n Start: u \n } }'
        assert elaboration_codes(src, "M") == ["unknown-class"]

    def test_instance_of_mcfsm_class(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "Inner" { Sw inst A { \n Start: u \n } }\n'
            'McFSM class "M" { Inner inst B { \n Start: u \n } }'
        )
        assert elaboration_codes(src, "M") == ["not-an-fsm-class"]

    def test_duplicate_edge_in_class(self):
        src = (
            'FSM class "Sw" { hop u_d += xP \n hop u_d += xQ }\n'
            'McFSM class "M" { Sw inst A { \n Start: u \n } }'
        )
        assert elaboration_codes(src, "M") == ["duplicate-edge"]

    def test_nondeterministic_state(self):
        src = (
            'FSM class "T" { hop a_b += xGo \n hop a_c += xGo2 }\n'
            'McFSM class "N" { T inst I { \n Start: a \n cap &xGo += ../xHit \n cap &xGo2 += ../xHit \n } }'
        )
        assert elaboration_codes(src, "N") == ["nondeterministic-state"]

    def test_diagnostics_accumulate(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M" {\n'
            '  Sw inst A { \n Start: nope \n cap &xZ += ../xGo \n }\n'
            '  Sw inst B { \n Start: u \n cap &xP += ../C/yF \n }\n'
            "}"
        )
        codes = elaboration_codes(src, "M")
        assert sorted(codes) == ["unknown-path", "unknown-path", "unknown-start-state"]

    def test_diagnostic_rendering(self):
        src = 'FSM class "Sw" { hop u_d += xP }\nMcFSM class "M" { Sw inst A { \n Start: sideways \n } }'
        with pytest.raises(ElaborationError) as exc_info:
            compile_model(src, "M", filename="demo.mcfsm")
        diag = exc_info.value.diagnostics[0]
        assert str(diag).startswith("demo.mcfsm:")
        assert ": error: " in str(diag)

    def test_elaborating_an_fsm_class(self, combo_source):
        ast = parse(combo_source)
        with pytest.raises(ElaborationError) as exc_info:
            elaborate(ast, "Switch")
        assert codes_of(exc_info.value) == ["unknown-class"]

    def test_elaborating_a_missing_class(self, combo_source):
        ast = parse(combo_source)
        with pytest.raises(ElaborationError) as exc_info:
            elaborate(ast, "Nothing")
        assert codes_of(exc_info.value) == ["unknown-class"]


class TestCompileModel:
    def test_auto_picks_single_mcfsm_class(self, combo_source):
        model = compile_model(combo_source)
        assert model.name == "ComboSwitches"

    def test_ambiguous_without_class_name(self):
        src = (
            'FSM class "Sw" { hop u_d += xP }\n'
            'McFSM class "M1" { Sw inst A { \n Start: u \n } }\n'
            'McFSM class "M2" { Sw inst A { \n Start: u \n } }'
        )
        with pytest.raises(ElaborationError) as exc_info:
            compile_model(src)
        assert codes_of(exc_info.value) == ["ambiguous-class"]

    def test_fixture_models_compile(self, loop_model, solo_model, fan_model):
        assert model_size(loop_model) == (4, 4)
        assert model_size(solo_model) == (3, 2)
        assert model_size(fan_model) == (7, 7)

    def test_solo_self_coupling(self, solo_model):
        c = solo_model.machine("/Solo/C")
        b_c = c.edges[1]
        assert [ev.path for ev in b_c.captures] == ["/Solo/C/a_b"]
        assert isinstance(b_c.captures[0], InternalEvent)
