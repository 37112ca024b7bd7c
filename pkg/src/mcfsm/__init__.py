"""mcfsm: compiler, runtime, analyzer and code generator for coupled state machines."""

__version__ = "0.1.0"

from .errors import (
    CascadeOverflow,
    Diagnostic,
    DslError,
    ElaborationError,
    McfsmError,
    ModelError,
    ParseError,
    SequenceError,
    SessionNotFound,
    StateSpaceTooLarge,
    TableFormatError,
    UnknownBackend,
    UnknownExternalEvent,
    UnknownPath,
)
from .model import (
    EdgeId,
    EventRef,
    ExternalEvent,
    GlobalState,
    InternalEvent,
    ResolvedEdge,
    ResolvedMachine,
    ResolvedModel,
    StateId,
    initial_state,
    model_size,
)
from .dsl import compile_model, elaborate, parse
from .runtime import (
    DEFAULT_CASCADE_CAP,
    HandlerRegistry,
    MacroStepTrace,
    RuntimeSession,
    XQueue,
    macro_step,
    resolve_external,
    run_sequence,
    trace_to_dict,
    trace_to_json,
    trace_to_text,
)
from .analysis import (
    BoundReport,
    CouplingGraph,
    EventBound,
    ProductFsm,
    build_coupling_graph,
    cascade_bound,
    check_forbidden,
    expand_product,
    generate_switch_family,
    reachable_states,
    render_bound_report,
    switch_family_source,
    to_dot,
)
from .codegen import backends, emit_source, emit_table, event_index, parse_table
from .service import McfsmService, ProtocolClient, ProtocolServer

__all__ = [
    "BoundReport",
    "CascadeOverflow",
    "CouplingGraph",
    "DEFAULT_CASCADE_CAP",
    "Diagnostic",
    "DslError",
    "EdgeId",
    "ElaborationError",
    "EventBound",
    "EventRef",
    "ExternalEvent",
    "GlobalState",
    "HandlerRegistry",
    "InternalEvent",
    "MacroStepTrace",
    "McfsmError",
    "McfsmService",
    "ModelError",
    "ParseError",
    "ProductFsm",
    "ProtocolClient",
    "ProtocolServer",
    "ResolvedEdge",
    "ResolvedMachine",
    "ResolvedModel",
    "RuntimeSession",
    "SequenceError",
    "SessionNotFound",
    "StateId",
    "StateSpaceTooLarge",
    "TableFormatError",
    "UnknownBackend",
    "UnknownExternalEvent",
    "UnknownPath",
    "XQueue",
    "backends",
    "build_coupling_graph",
    "cascade_bound",
    "check_forbidden",
    "compile_model",
    "elaborate",
    "emit_source",
    "emit_table",
    "event_index",
    "expand_product",
    "generate_switch_family",
    "initial_state",
    "macro_step",
    "model_size",
    "parse",
    "parse_table",
    "reachable_states",
    "render_bound_report",
    "resolve_external",
    "run_sequence",
    "switch_family_source",
    "to_dot",
    "trace_to_dict",
    "trace_to_json",
    "trace_to_text",
    "__version__",
]
