"""Frontend for the coupled state machine DSL.

Source text is lexed and parsed into a small AST, then elaborated into a
ResolvedModel: machine classes are cloned per instance, `cap` selectors are
resolved against the instance hierarchy, and external events are collected
from the x-prefixed paths the caps reference.

Grammar sketch (statements are newline-terminated, `#` starts a comment):

    file      := { fsm-class | mcfsm-class }
    fsm-class := "FSM" "class" STRING "{" { hop } "}"
    hop       := "hop" WORD "+=" WORD+          # WORD is "src_dst", labels x*/y*
    mcfsm-class := "McFSM" "class" STRING "{" { instance } "}"
    instance  := WORD "inst" WORD "{" { start | cap } "}"
    start     := "Start" ":" WORD
    cap       := "cap" selector "+=" selector+

Selectors come in four shapes: `&label` (edges of the current instance carrying
that label), globs (`*` matches within one path segment), `../`-relative paths,
and absolute paths rooted at the model name.
"""

from __future__ import annotations

from dataclasses import dataclass
from fnmatch import fnmatchcase

from .errors import Diagnostic, ElaborationError, ParseError
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
    is_identifier,
)

WORD_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_&*./"
)

# keywords terminate greedy word lists, so a missing line break is caught early
RESERVED = frozenset({"FSM", "McFSM", "class", "inst", "hop", "cap", "Start"})


@dataclass(frozen=True, slots=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # WORD STRING LBRACE RBRACE PLUSEQ COLON NEWLINE EOF
    text: str
    line: int
    col: int


def tokenize(source: str, *, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    lines = source.split("\n")
    for lineno, raw in enumerate(lines, start=1):
        start_count = len(tokens)
        i = 0
        while i < len(raw):
            ch = raw[i]
            if ch in " \t\r":
                i += 1
                continue
            if ch == "#":
                break
            col = i + 1
            if ch == "{":
                tokens.append(Token("LBRACE", "{", lineno, col))
                i += 1
            elif ch == "}":
                tokens.append(Token("RBRACE", "}", lineno, col))
                i += 1
            elif ch == ":":
                tokens.append(Token("COLON", ":", lineno, col))
                i += 1
            elif ch == "+":
                if raw[i : i + 2] != "+=":
                    raise ParseError(lineno, col, 'expected "+="', file=filename)
                tokens.append(Token("PLUSEQ", "+=", lineno, col))
                i += 2
            elif ch == '"':
                end = raw.find('"', i + 1)
                if end < 0:
                    raise ParseError(lineno, col, "expected a closing quote", file=filename)
                tokens.append(Token("STRING", raw[i + 1 : end], lineno, col))
                i = end + 1
            elif ch in WORD_CHARS:
                j = i
                while j < len(raw) and raw[j] in WORD_CHARS:
                    j += 1
                tokens.append(Token("WORD", raw[i:j], lineno, col))
                i = j
            else:
                raise ParseError(lineno, col, f"unexpected character {ch!r}", file=filename)
        if len(tokens) > start_count:
            tokens.append(Token("NEWLINE", "", lineno, len(raw) + 1))
    tokens.append(Token("EOF", "", len(lines), len(lines[-1]) + 1))
    return tokens


# ---------------------------------------------------------------- AST


@dataclass(frozen=True, slots=True)
class HopDecl:
    name: str  # "src_dst"
    labels: tuple[str, ...]
    span: Span

    @property
    def src(self) -> str:
        return self.name.split("_")[0]

    @property
    def dst(self) -> str:
        return self.name.split("_")[1]


@dataclass(frozen=True, slots=True)
class FsmClassDecl:
    name: str
    hops: tuple[HopDecl, ...]
    span: Span


@dataclass(frozen=True, slots=True)
class Selector:
    kind: str  # "semantic" | "glob" | "relative" | "absolute"
    text: str
    span: Span


@dataclass(frozen=True, slots=True)
class CapDecl:
    selector: Selector
    targets: tuple[Selector, ...]
    span: Span


@dataclass(frozen=True, slots=True)
class InstanceDecl:
    class_name: str
    name: str
    start: str | None
    start_span: Span | None
    caps: tuple[CapDecl, ...]
    span: Span


@dataclass(frozen=True, slots=True)
class McfsmClassDecl:
    name: str
    instances: tuple[InstanceDecl, ...]
    span: Span


ClassDecl = FsmClassDecl | McfsmClassDecl


@dataclass(frozen=True, slots=True)
class Ast:
    classes: tuple[ClassDecl, ...]

    def mcfsm_class_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes if isinstance(c, McfsmClassDecl))

    def fsm_class_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes if isinstance(c, FsmClassDecl))


# ---------------------------------------------------------------- parser


def _classify_selector(text: str, line: int, col: int, filename: str) -> Selector:
    span = Span(line, col)
    if text.startswith("&"):
        if not is_identifier(text[1:]):
            raise ParseError(line, col, f'expected "&label" with an identifier label, got {text!r}', file=filename)
        return Selector("semantic", text, span)
    if "*" in text:
        return Selector("glob", text, span)
    if text.startswith("../"):
        return Selector("relative", text, span)
    if text.startswith("/"):
        return Selector("absolute", text, span)
    raise ParseError(
        line, col,
        f'expected a selector (&label, a glob, "../path" or "/absolute/path"), got {text!r}',
        file=filename,
    )


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, tok: Token, expected: str) -> ParseError:
        got = tok.text or tok.kind.lower()
        return ParseError(tok.line, tok.col, f"expected {expected}, got {got!r}", file=self.filename)

    def expect(self, kind: str, expected: str) -> Token:
        tok = self.advance()
        if tok.kind != kind:
            raise self.fail(tok, expected)
        return tok

    def expect_word(self, text: str) -> Token:
        tok = self.advance()
        if tok.kind != "WORD" or tok.text != text:
            raise self.fail(tok, f'"{text}"')
        return tok

    def skip_newlines(self):
        while self.peek().kind == "NEWLINE":
            self.advance()

    def end_statement(self):
        tok = self.peek()
        if tok.kind == "NEWLINE":
            self.advance()
        elif tok.kind not in ("RBRACE", "EOF"):
            raise self.fail(tok, "end of statement")

    # file := { class-decl }
    def parse_file(self) -> Ast:
        classes: list[ClassDecl] = []
        names: set[str] = set()
        self.skip_newlines()
        while self.peek().kind != "EOF":
            decl = self.parse_class()
            if decl.name in names:
                raise ParseError(
                    decl.span.line, decl.span.col,
                    f'duplicate class name "{decl.name}"', file=self.filename,
                )
            names.add(decl.name)
            classes.append(decl)
            self.skip_newlines()
        return Ast(tuple(classes))

    def parse_class(self) -> ClassDecl:
        tok = self.advance()
        if tok.kind != "WORD" or tok.text not in ("FSM", "McFSM"):
            raise self.fail(tok, '"FSM" or "McFSM"')
        self.expect_word("class")
        name_tok = self.expect("STRING", "a quoted class name")
        if not is_identifier(name_tok.text):
            raise ParseError(
                name_tok.line, name_tok.col,
                f"class name must be an identifier, got {name_tok.text!r}", file=self.filename,
            )
        span = Span(tok.line, tok.col)
        self.expect("LBRACE", '"{"')
        if tok.text == "FSM":
            hops = self.parse_hops()
            self.expect("RBRACE", '"}"')
            self.end_statement()
            return FsmClassDecl(name_tok.text, hops, span)
        instances = self.parse_instances()
        self.expect("RBRACE", '"}"')
        self.end_statement()
        return McfsmClassDecl(name_tok.text, instances, span)

    def parse_hops(self) -> tuple[HopDecl, ...]:
        hops: list[HopDecl] = []
        self.skip_newlines()
        while self.peek().kind != "RBRACE":
            kw = self.expect_word("hop")
            name_tok = self.expect("WORD", "a hop name")
            parts = name_tok.text.split("_")
            if len(parts) != 2 or not all(is_identifier(p) for p in parts):
                raise ParseError(
                    name_tok.line, name_tok.col,
                    f'expected a hop name of the form "src_dst", got {name_tok.text!r}',
                    file=self.filename,
                )
            self.expect("PLUSEQ", '"+="')
            labels: list[str] = []
            while self.peek().kind == "WORD" and self.peek().text not in RESERVED:
                lab = self.advance()
                labels.append(lab.text)
            if not labels:
                raise self.fail(self.peek(), "at least one label")
            self.end_statement()
            hops.append(HopDecl(name_tok.text, tuple(labels), Span(kw.line, kw.col)))
            self.skip_newlines()
        return tuple(hops)

    def parse_instances(self) -> tuple[InstanceDecl, ...]:
        instances: list[InstanceDecl] = []
        names: set[str] = set()
        self.skip_newlines()
        while self.peek().kind != "RBRACE":
            cls_tok = self.expect("WORD", "an FSM class name")
            self.expect_word("inst")
            name_tok = self.expect("WORD", "an instance name")
            if not is_identifier(name_tok.text):
                raise ParseError(
                    name_tok.line, name_tok.col,
                    f"instance name must be an identifier, got {name_tok.text!r}",
                    file=self.filename,
                )
            if name_tok.text in names:
                raise ParseError(
                    name_tok.line, name_tok.col,
                    f'duplicate instance name "{name_tok.text}"', file=self.filename,
                )
            names.add(name_tok.text)
            self.expect("LBRACE", '"{"')
            start, start_span, caps = self.parse_instance_body()
            self.expect("RBRACE", '"}"')
            self.end_statement()
            instances.append(
                InstanceDecl(
                    class_name=cls_tok.text,
                    name=name_tok.text,
                    start=start,
                    start_span=start_span,
                    caps=tuple(caps),
                    span=Span(cls_tok.line, cls_tok.col),
                )
            )
            self.skip_newlines()
        return tuple(instances)

    def parse_instance_body(self):
        start: str | None = None
        start_span: Span | None = None
        caps: list[CapDecl] = []
        self.skip_newlines()
        while self.peek().kind != "RBRACE":
            kw = self.expect("WORD", '"Start:" or a "cap" statement')
            if kw.text == "Start":
                self.expect("COLON", '":"')
                state_tok = self.expect("WORD", "a state name")
                if start is not None:
                    raise ParseError(kw.line, kw.col, "duplicate Start declaration", file=self.filename)
                start = state_tok.text
                start_span = Span(state_tok.line, state_tok.col)
                self.end_statement()
            elif kw.text == "cap":
                sel_tok = self.expect("WORD", "a selector")
                selector = _classify_selector(sel_tok.text, sel_tok.line, sel_tok.col, self.filename)
                self.expect("PLUSEQ", '"+="')
                targets: list[Selector] = []
                while self.peek().kind == "WORD" and self.peek().text not in RESERVED:
                    t = self.advance()
                    targets.append(_classify_selector(t.text, t.line, t.col, self.filename))
                if not targets:
                    raise self.fail(self.peek(), "at least one event reference")
                self.end_statement()
                caps.append(CapDecl(selector, tuple(targets), Span(kw.line, kw.col)))
            else:
                raise self.fail(kw, '"Start:" or a "cap" statement')
            self.skip_newlines()
        return start, start_span, caps


def parse(source: str, *, filename: str = "<input>") -> Ast:
    """Parse DSL source into an Ast. Raises ParseError on the first violation."""
    return _Parser(tokenize(source, filename=filename), filename).parse_file()


# ---------------------------------------------------------------- elaboration


class _ProtoEdge:
    __slots__ = ("id", "x_labels", "y_labels", "captures", "capture_set")

    def __init__(self, edge_id: EdgeId, x_labels: set[str], y_labels: set[str]):
        self.id = edge_id
        self.x_labels = x_labels
        self.y_labels = y_labels
        self.captures: list[EventRef] = []
        self.capture_set: set[EventRef] = set()


class _ProtoInstance:
    __slots__ = ("decl", "path", "class_name", "states", "edges", "start",
                 "hop_index", "label_index")

    def __init__(self, decl: InstanceDecl, path: str, class_name: str):
        self.decl = decl
        self.path = path
        self.class_name = class_name
        self.states: list[StateId] = []
        self.edges: list[_ProtoEdge] = []
        self.start: StateId | None = None
        self.hop_index: dict[str, _ProtoEdge] = {}
        self.label_index: dict[str, list[_ProtoEdge]] = {}

    @property
    def name(self) -> str:
        return self.decl.name


class Elaborator:
    """Turns one McFSM class of an Ast into a ResolvedModel.

    Diagnostics are collected rather than raised one at a time; elaborate()
    raises ElaborationError with the full list when anything went wrong.
    provenance maps every resolved capture back to the cap that created it.
    """

    def __init__(self, ast: Ast, *, filename: str = "<input>"):
        self.ast = ast
        self.filename = filename
        self.diagnostics: list[Diagnostic] = []
        self.provenance: dict[tuple[EdgeId, EventRef], Span] = {}
        self.model_name = ""
        self.instances: dict[str, _ProtoInstance] = {}
        self.externals: dict[str, None] = {}  # insertion-ordered set of paths
        self._fail_note: str | None = None

    def _error(self, span: Span, code: str, message: str):
        self.diagnostics.append(
            Diagnostic(span.line, span.col, "error", code, message, file=self.filename)
        )

    def elaborate(self, class_name: str) -> ResolvedModel:
        decl = None
        for c in self.ast.classes:
            if isinstance(c, McfsmClassDecl) and c.name == class_name:
                decl = c
                break
        if decl is None:
            is_fsm = class_name in self.ast.fsm_class_names()
            msg = (
                f'"{class_name}" is an FSM class, not a McFSM class'
                if is_fsm else f'no McFSM class "{class_name}" in this source'
            )
            raise ElaborationError(
                [Diagnostic(1, 1, "error", "unknown-class", msg, file=self.filename)]
            )
        self.model_name = decl.name
        fsm_classes = {c.name: c for c in self.ast.classes if isinstance(c, FsmClassDecl)}
        for inst_decl in decl.instances:
            self._build_instance(inst_decl, fsm_classes)
        for proto in self.instances.values():
            for cap in proto.decl.caps:
                self._apply_cap(proto, cap)
        self._check_determinism()
        if self.diagnostics:
            raise ElaborationError(self.diagnostics)
        machines = []
        for proto in self.instances.values():
            edges = tuple(
                ResolvedEdge(
                    id=e.id,
                    captures=tuple(e.captures),
                    x_labels=frozenset(e.x_labels),
                    y_labels=frozenset(e.y_labels),
                )
                for e in proto.edges
            )
            machines.append(
                ResolvedMachine(
                    instance_path=proto.path,
                    class_name=proto.class_name,
                    states=tuple(proto.states),
                    edges=edges,
                    start=proto.start,
                    transition_table=build_transition_table(edges),
                )
            )
        return ResolvedModel(
            name=decl.name,
            machines=tuple(machines),
            external_events=tuple(self.externals),
            dispatch_order=tuple(m.instance_path for m in machines),
        )

    # -------------------------------------------------- pass 1: instances

    def _build_instance(self, inst_decl: InstanceDecl, fsm_classes: dict[str, FsmClassDecl]):
        cls = fsm_classes.get(inst_decl.class_name)
        if cls is None:
            if inst_decl.class_name in self.ast.mcfsm_class_names():
                self._error(
                    inst_decl.span, "not-an-fsm-class",
                    f'"{inst_decl.class_name}" is a McFSM class; instances need an FSM class',
                )
            else:
                self._error(
                    inst_decl.span, "unknown-class",
                    f'unknown FSM class "{inst_decl.class_name}"',
                )
            return
        path = f"/{self.model_name}/{inst_decl.name}"
        proto = _ProtoInstance(inst_decl, path, cls.name)
        state_by_name: dict[str, StateId] = {}

        def intern_state(name: str) -> StateId:
            sid = state_by_name.get(name)
            if sid is None:
                sid = StateId(path, name)
                state_by_name[name] = sid
                proto.states.append(sid)
            return sid

        for hop in cls.hops:
            src = intern_state(hop.src)
            dst = intern_state(hop.dst)
            if hop.name in proto.hop_index:
                self._error(
                    hop.span, "duplicate-edge",
                    f'duplicate edge "{hop.name}" in class "{cls.name}"',
                )
                continue
            x_labels: set[str] = set()
            y_labels: set[str] = set()
            for label in hop.labels:
                if label.startswith("x") and is_identifier(label):
                    x_labels.add(label)
                elif label.startswith("y") and is_identifier(label):
                    y_labels.add(label)
                else:
                    self._error(
                        hop.span, "invalid-label",
                        f'label "{label}" on hop "{hop.name}" must be an x- or y-prefixed identifier',
                    )
            edge = _ProtoEdge(EdgeId(path, src, dst), x_labels, y_labels)
            proto.edges.append(edge)
            proto.hop_index[hop.name] = edge
        # label index preserves edge declaration order
        for edge in proto.edges:
            for label in edge.x_labels | edge.y_labels:
                bucket = proto.label_index.setdefault(label, [])
                bucket.append(edge)

        if inst_decl.start is None:
            self._error(inst_decl.span, "missing-start", f'instance "{inst_decl.name}" lacks a Start: declaration')
        elif "_" in inst_decl.start:
            self._error(
                inst_decl.start_span, "underscore-in-state-name",
                f'state name "{inst_decl.start}" may not contain underscores',
            )
        elif inst_decl.start not in state_by_name:
            known = ", ".join(s.name for s in proto.states) or "none"
            self._error(
                inst_decl.start_span, "unknown-start-state",
                f'class "{cls.name}" has no state "{inst_decl.start}" (states: {known})',
            )
        else:
            proto.start = state_by_name[inst_decl.start]
        self.instances[inst_decl.name] = proto

    # -------------------------------------------------- pass 2: captures

    def _apply_cap(self, proto: _ProtoInstance, cap: CapDecl):
        sel_hits = self._resolve(cap.selector, proto)
        edges: list[_ProtoEdge] = []
        if sel_hits is not None:
            for hit in sel_hits:
                if isinstance(hit, _ProtoEdge):
                    edges.append(hit)
                else:
                    what = f'external event "{hit}"' if isinstance(hit, str) else f'instance "{hit.path}"'
                    self._error(
                        cap.selector.span, "not-an-edge",
                        f'selector "{cap.selector.text}" matches {what}; cap needs edges',
                    )
        events: list[EventRef] = []
        for target in cap.targets:
            hits = self._resolve(target, proto)
            if hits is None:
                continue
            for hit in hits:
                if isinstance(hit, _ProtoEdge):
                    events.append(InternalEvent(hit.id))
                elif isinstance(hit, str):
                    self.externals.setdefault(hit)
                    events.append(ExternalEvent(hit))
                else:
                    self._error(
                        target.span, "not-an-event",
                        f'"{target.text}" names instance "{hit.path}", which is not an event',
                    )
        for edge in edges:
            for event in events:
                if event in edge.capture_set:
                    continue  # captures form a set; repeats are dropped
                edge.capture_set.add(event)
                edge.captures.append(event)
                self.provenance[(edge.id, event)] = cap.span

    def _check_determinism(self):
        for proto in self.instances.values():
            seen: dict[tuple[str, EventRef], _ProtoEdge] = {}
            for edge in proto.edges:
                for event in edge.captures:
                    key = (edge.id.src.name, event)
                    other = seen.get(key)
                    if other is None:
                        seen[key] = edge
                        continue
                    span = self.provenance.get((edge.id, event), proto.decl.span)
                    self._error(
                        span, "nondeterministic-state",
                        f'state "{edge.id.src.name}" of "{proto.name}": event {event.path} '
                        f'enables both "{other.id.hop_name}" and "{edge.id.hop_name}"',
                    )

    # -------------------------------------------------- selector resolution

    def _resolve(self, sel: Selector, proto: _ProtoInstance):
        """Resolve one selector in the context of an instance.

        Returns a deduplicated ordered list of _ProtoEdge, external event path
        (str), or _ProtoInstance hits; None after recording a diagnostic.
        """
        self._fail_note = None
        if sel.kind == "semantic":
            label = sel.text[1:]
            hits = list(proto.label_index.get(label, ()))
            if not hits:
                self._error(
                    sel.span, "unknown-path",
                    f'no edge of instance "{proto.name}" carries the label "{label}"',
                )
                return None
            return hits
        if sel.kind == "absolute":
            segs = sel.text.strip("/").split("/")
            if not segs or segs[0] != self.model_name:
                self._error(
                    sel.span, "unknown-path",
                    f'absolute paths are rooted at "/{self.model_name}", got "{sel.text}"',
                )
                return None
            hits = self._walk(None, segs[1:])
        else:
            hits = self._walk(proto, sel.text.split("/"))
        hits = self._dedup(hits)
        if not hits:
            if "*" in sel.text:
                self._error(sel.span, "empty-glob-match", f'glob "{sel.text}" matches nothing')
            else:
                note = self._fail_note or f'"{sel.text}" does not name anything'
                self._error(sel.span, "unknown-path", note)
            return None
        return hits

    @staticmethod
    def _dedup(hits: list) -> list:
        out = []
        seen = set()
        for hit in hits:
            key = hit.id if isinstance(hit, _ProtoEdge) else (
                hit if isinstance(hit, str) else hit.path
            )
            if key not in seen:
                seen.add(key)
                out.append(hit)
        return out

    def _note_fail(self, message: str):
        if self._fail_note is None:
            self._fail_note = message

    def _walk(self, node: _ProtoInstance | None, segs: list[str]) -> list:
        """node=None means the McFSM level; otherwise a position inside an instance."""
        if not segs:
            return [node] if node is not None else []
        seg, rest = segs[0], segs[1:]
        if seg == "":
            self._note_fail("empty path segment")
            return []
        if node is not None:
            if seg == "..":
                return self._walk(None, rest)
            if rest:
                self._note_fail(
                    f'"{seg}" inside instance "{node.name}" cannot have children; '
                    "edges and labels are leaves"
                )
                return []
            if "*" in seg:
                return [
                    e for e in node.edges
                    if fnmatchcase(e.id.hop_name, seg)
                    or any(fnmatchcase(label, seg) for label in e.x_labels | e.y_labels)
                ]
            if "_" in seg:
                edge = node.hop_index.get(seg)
                if edge is None:
                    self._note_fail(f'no edge "{seg}" in instance "{node.name}"')
                    return []
                return [edge]
            hits = list(node.label_index.get(seg, ()))
            if not hits:
                self._note_fail(f'no edge of instance "{node.name}" carries the label "{seg}"')
            return hits
        # McFSM level
        if seg == "..":
            self._note_fail('".." cannot go above the model')
            return []
        if not rest:
            if "*" in seg:
                return [p for name, p in self.instances.items() if fnmatchcase(name, seg)]
            proto = self.instances.get(seg)
            if proto is not None:
                return [proto]
            if seg.startswith("x") and is_identifier(seg):
                return [f"/{self.model_name}/{seg}"]
            self._note_fail(
                f'"{seg}" names neither an instance of "{self.model_name}" '
                "nor an x-prefixed external event"
            )
            return []
        if "*" in seg:
            out: list = []
            for name, proto in self.instances.items():
                if fnmatchcase(name, seg):
                    out.extend(self._walk(proto, rest))
            return out
        proto = self.instances.get(seg)
        if proto is None:
            self._note_fail(f'no instance "{seg}" in "{self.model_name}"')
            return []
        return self._walk(proto, rest)


def elaborate(ast: Ast, class_name: str, *, filename: str = "<input>") -> ResolvedModel:
    """Elaborate one McFSM class of a parsed file."""
    return Elaborator(ast, filename=filename).elaborate(class_name)


def compile_model(source: str, class_name: str | None = None, *, filename: str = "<input>") -> ResolvedModel:
    """Parse and elaborate in one step.

    With class_name=None the source must define exactly one McFSM class.
    """
    ast = parse(source, filename=filename)
    if class_name is None:
        names = ast.mcfsm_class_names()
        if len(names) != 1:
            listing = ", ".join(names) or "none"
            raise ElaborationError(
                [
                    Diagnostic(
                        1, 1, "error", "ambiguous-class",
                        f"source defines {len(names)} McFSM classes ({listing}); pick one",
                        file=filename,
                    )
                ]
            )
        class_name = names[0]
    return elaborate(ast, class_name, filename=filename)
