"""Command-line front end.

Exit codes: 0 success, 1 source diagnostics or domain failure (unknown
event, cascade overflow, forbidden state reached), 2 usage problems,
3 unexpected internal errors. All informational output goes to stdout and
is byte-identical across identical invocations; diagnostics and error
messages go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    cascade_bound,
    check_forbidden,
    expand_product,
    reachable_states,
    render_bound_report,
    to_dot,
)
from .codegen import backends, emit_source, emit_table
from .dsl import compile_model
from .errors import DslError, McfsmError
from .model import ResolvedModel, model_size
from .runtime import (
    DEFAULT_CASCADE_CAP,
    initial_state,
    run_sequence,
    trace_to_json,
    trace_to_text,
)
from .service import serve_forever

TRACE_FORMATS = ("human", "jsonl")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcfsm",
        description="Toolchain for multiple coupled finite state machines.",
    )
    parser.add_argument("--version", action="version", version=f"mcfsm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_args(p: argparse.ArgumentParser):
        p.add_argument("file", help="DSL source file")
        p.add_argument("--class", dest="mcfsm_class", metavar="NAME", default=None,
                       help="top-level class (optional when the file has exactly one)")

    p = sub.add_parser("check", help="parse, elaborate and validate a source file")
    model_args(p)
    p.add_argument("-v", "--verbose", action="store_true",
                   help="also print one line per machine")

    p = sub.add_parser("simulate", help="run a sequence of external events")
    model_args(p)
    p.add_argument("--events", required=True, metavar="E1,E2,...",
                   help="comma-separated external events (leaf names or full paths)")
    p.add_argument("--trace", choices=TRACE_FORMATS, default="human")
    p.add_argument("--cascade-cap", type=int, default=DEFAULT_CASCADE_CAP,
                   metavar="N", help="abort a macro-step after N processed events")

    p = sub.add_parser("bound", help="static per-event cascade bounds")
    model_args(p)

    p = sub.add_parser("expand", help="build the exhaustive product automaton")
    model_args(p)
    p.add_argument("--max-states", type=int, default=None, metavar="K")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--dot", action="store_true", help="print the product as DOT")
    group.add_argument("--table", action="store_true",
                       help="print every product transition")

    p = sub.add_parser("reach", help="reachable-state count and forbidden-state search")
    model_args(p)
    p.add_argument("--forbid", metavar="M1=S1,M2=S2,...", default=None,
                   help="partial state assignment; exit 1 if reachable")
    p.add_argument("--max-states", type=int, default=None, metavar="K")

    p = sub.add_parser("codegen", help="emit the flat table and a source backend")
    model_args(p)
    p.add_argument("--backend", choices=backends(), default="c")
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("serve", help="run the interactive TCP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7333)
    return parser


def _load(args) -> ResolvedModel:
    try:
        source = Path(args.file).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read {args.file}: {err.strerror or err}") from None
    return compile_model(source, args.mcfsm_class, filename=args.file)


class UsageError(Exception):
    pass


def _cmd_check(args) -> int:
    model = _load(args)
    states, edges = model_size(model)
    print(
        f"{model.name}: {len(model.machines)} machines, {states} states,"
        f" {edges} edges, {len(model.external_events)} external events"
    )
    if args.verbose:
        for machine in model.machines:
            name = machine.instance_path.rsplit("/", 1)[-1]
            print(
                f"  {name} ({machine.class_name}): {len(machine.states)} states,"
                f" {len(machine.edges)} edges"
            )
    return 0


def _cmd_simulate(args) -> int:
    model = _load(args)
    events = [e.strip() for e in args.events.split(",") if e.strip()]
    if not events:
        raise UsageError("--events must name at least one event")
    final, traces = run_sequence(
        model, initial_state(model), events, cascade_cap=args.cascade_cap
    )
    if args.trace == "jsonl":
        for trace in traces:
            print(trace_to_json(trace))
    else:
        for trace in traces:
            print(trace_to_text(trace))
        print(f"final: {final}")
    return 0


def _cmd_bound(args) -> int:
    print(render_bound_report(cascade_bound(_load(args))), end="")
    return 0


def _cmd_expand(args) -> int:
    model = _load(args)
    kwargs = {} if args.max_states is None else {"max_states": args.max_states}
    product = expand_product(model, **kwargs)
    if args.dot:
        print(to_dot(product), end="")
        return 0
    if args.table:
        print(f"product {product.model_name}: {product.n_states} states,"
              f" {product.n_transitions} transitions")
        for state in product.states:
            print(f"state {state}")
            for event in product.external_events:
                print(f"  {event.rsplit('/', 1)[-1]} -> {product.transitions[(state, event)]}")
        return 0
    states, _ = model_size(model)
    ratio = product.n_states / states
    print(
        f"{product.model_name}: machine states {states}, product states"
        f" {product.n_states}, transitions {product.n_transitions}, ratio {ratio:.2f}"
    )
    return 0


def _parse_predicate(text: str) -> dict[str, str]:
    predicate = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        machine, sep, state = part.partition("=")
        if not sep or not machine.strip() or not state.strip():
            raise UsageError(f"malformed --forbid entry {part!r} (want MACHINE=STATE)")
        predicate[machine.strip()] = state.strip()
    if not predicate:
        raise UsageError("--forbid must name at least one MACHINE=STATE pair")
    return predicate


def _cmd_reach(args) -> int:
    model = _load(args)
    kwargs = {} if args.max_states is None else {"max_states": args.max_states}
    if args.forbid is None:
        reach = reachable_states(model, **kwargs)
        print(f"reachable states: {len(reach)}")
        return 0
    predicate = _parse_predicate(args.forbid)
    holds_never, witness = check_forbidden(model, predicate, **kwargs)
    if holds_never:
        print("forbidden state unreachable")
        return 0
    if witness == ():
        print("forbidden state reachable: it is the initial state")
    else:
        leafs = " ".join(w.rsplit("/", 1)[-1] for w in witness)
        print(f"forbidden state reachable via: {leafs}")
    return 1


def _cmd_codegen(args) -> int:
    model = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table_path = out / f"{model.name}.table"
    table_path.write_bytes(emit_table(model))
    ext = {"c": "c"}[args.backend]
    source_path = out / f"{model.name}.{ext}"
    source_path.write_text(emit_source(model, args.backend), encoding="utf-8")
    print(f"wrote {table_path}")
    print(f"wrote {source_path}")
    return 0


def _cmd_serve(args) -> int:
    serve_forever(args.host, args.port)
    return 0


_COMMANDS = {
    "check": _cmd_check,
    "simulate": _cmd_simulate,
    "bound": _cmd_bound,
    "expand": _cmd_expand,
    "reach": _cmd_reach,
    "codegen": _cmd_codegen,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except DslError as err:
        for diagnostic in err.diagnostics:
            print(diagnostic, file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    except McfsmError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 — last-resort guard for exit code 3
        print(f"internal error: {err!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
