"""Exception hierarchy and source diagnostics."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """One compiler message, printable as ``file:line:col: severity: message``."""

    line: int
    col: int
    severity: str  # "error" or "warning"
    code: str  # stable kebab-case identifier, e.g. "unknown-path"
    message: str
    file: str = "<input>"

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.severity}: {self.message}"


class McfsmError(Exception):
    """Base class for every error raised by this package."""


class ModelError(McfsmError):
    """A structural invariant of the elaborated model was violated."""


class DslError(McfsmError):
    """A source-level problem; carries the full diagnostics list."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ParseError(DslError):
    """Token-level or structural violation while parsing DSL source."""

    def __init__(self, line: int, col: int, expected: str, *, file: str = "<input>"):
        self.line = line
        self.col = col
        self.expected = expected
        diag = Diagnostic(line, col, "error", "parse-error", expected, file=file)
        super().__init__([diag])


class ElaborationError(DslError):
    """Elaboration failed; one diagnostic per problem found."""


class UnknownExternalEvent(McfsmError):
    def __init__(self, event: str, model_name: str = ""):
        self.event = event
        where = f" in model {model_name}" if model_name else ""
        super().__init__(f"unknown external event {event!r}{where}")


class CascadeOverflow(McfsmError):
    """A macro-step processed more events than the configured cap."""

    def __init__(self, event, limit: int, state=None):
        self.event = event
        self.limit = limit
        self.state = state
        super().__init__(
            f"macro-step for {getattr(event, 'path', event)} exceeded the cascade cap of {limit} processed events"
        )


class SequenceError(McfsmError):
    """An event sequence failed; records the index of the offending event."""

    def __init__(self, index: int, cause: McfsmError):
        self.index = index
        self.cause = cause
        super().__init__(f"event {index} failed: {cause}")


class StateSpaceTooLarge(McfsmError):
    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"state space has {size} states, above the configured cap of {limit}")


class UnknownPath(McfsmError):
    """A predicate or query referenced a machine or state that does not exist."""


class UnknownBackend(McfsmError):
    def __init__(self, backend: str, known: tuple[str, ...]):
        self.backend = backend
        super().__init__(f"unknown code generation backend {backend!r} (available: {', '.join(known)})")


class TableFormatError(McfsmError):
    """A flat transition-table document is malformed."""


class SessionNotFound(McfsmError):
    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"no live session {session_id!r}")
