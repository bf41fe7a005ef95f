"""Introductory-comment checks D01-D07 and the doc-head grammar.

A documentation head looks like::

    %% nth0(?Index, ?List, ?Elem) is nondet

with per-argument mode specifiers drawn from one of three vocabularies
(``recommended``, ``pldoc``, ``simple``), optional ``:type`` annotations,
and an optional determinism specifier (det/semidet/multi/nondet).  ``%%``
introduces a predicate callable from elsewhere, ``%`` an auxiliary one;
PlDoc's ``%!`` is accepted as an alias for ``%%``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .diagnostics import Config, Diagnostic, REGISTRY
from .reader import (
    Atom,
    Clause,
    ClauseKind,
    CommentAttachment,
    Compound,
    PredicateDef,
    Program,
    Term,
    Variable,
    group_predicates,
    is_compound,
    leaf_goals,
    strip_module_qualifier,
)
from .source_model import Span, Token, TokenKind

MODE_SYSTEMS: dict[str, frozenset[str]] = {
    "recommended": frozenset("*+=-/>?"),
    "pldoc": frozenset("+-?:@!"),
    "simple": frozenset("+-?"),
}
_ALL_MODES = frozenset().union(*MODE_SYSTEMS.values())

DETERMINISM_SPECIFIERS = ("det", "semidet", "multi", "nondet")

_INPUT_MODES = frozenset("+*")
_OUTPUT_MODES = frozenset("-/")


@dataclass
class ArgDoc:
    mode: str | None
    name: str
    type_name: str | None = None


@dataclass
class DocHead:
    predicate_name: str
    args: list[ArgDoc] = field(default_factory=list)
    determinism: str | None = None
    comment_span: Span | None = None
    marker: str = "double"

    @property
    def indicator(self) -> tuple[str, int]:
        return (self.predicate_name, len(self.args))


class DocHeadError(ValueError):
    """Raised when a comment cannot be read as a documentation head."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(message)
        self.message = message
        self.position = position


_MARKER = re.compile(r"%!|%+")
_NAME = re.compile(r"[a-z][A-Za-z0-9_]*")
_ARG_NAME = re.compile(r"[A-Z_][A-Za-z0-9_]*")


class _Cursor:
    def __init__(self, text: str) -> None:
        self.text = text
        self.i = 0

    def skip_ws(self) -> None:
        while self.i < len(self.text) and self.text[self.i] in " \t":
            self.i += 1

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def match(self, pattern: re.Pattern) -> str | None:
        m = pattern.match(self.text, self.i)
        if m:
            self.i = m.end()
            return m.group(0)
        return None

    def take(self, literal: str) -> bool:
        if self.text.startswith(literal, self.i):
            self.i += len(literal)
            return True
        return False


def _parse_structure(comment_text: str) -> DocHead:
    """Parse a doc head accepting the union of all mode vocabularies; the
    caller validates symbols against the active system."""
    first_line = comment_text.split("\n", 1)[0]
    cur = _Cursor(first_line)
    marker = cur.match(_MARKER)
    if marker is None:
        raise DocHeadError("doc comment must begin with '%'", 0)
    marker_kind = "double" if marker in ("%!",) or marker.startswith("%%") \
        else "single"
    cur.skip_ws()
    name = cur.match(_NAME)
    if name is None:
        raise DocHeadError("expected a predicate name", cur.i)
    args: list[ArgDoc] = []
    cur.skip_ws()
    if cur.take("("):
        while True:
            args.append(_parse_arg(cur))
            cur.skip_ws()
            if cur.take(","):
                continue
            if cur.take(")"):
                break
            raise DocHeadError("expected ',' or ')' in argument list", cur.i)
    cur.skip_ws()
    cur.take("//")  # PlDoc grammar-rule notation, tolerated
    cur.skip_ws()
    determinism = None
    if cur.match(re.compile(r"is(?![A-Za-z0-9_])")):
        cur.skip_ws()
        word = cur.match(re.compile(r"[a-z]+"))
        if word not in DETERMINISM_SPECIFIERS:
            raise DocHeadError(
                f"unknown determinism specifier {word!r} (expected one of "
                f"{', '.join(DETERMINISM_SPECIFIERS)})", cur.i)
        determinism = word
    cur.skip_ws()
    cur.take(".")
    cur.skip_ws()
    if cur.peek():
        raise DocHeadError(
            f"unexpected text after doc head: {first_line[cur.i:].strip()!r}",
            cur.i)
    return DocHead(predicate_name=name, args=args, determinism=determinism,
                   marker=marker_kind)


def _parse_arg(cur: _Cursor) -> ArgDoc:
    cur.skip_ws()
    mode = None
    if cur.peek() in _ALL_MODES:
        mode = cur.peek()
        cur.i += 1
        cur.skip_ws()
    name = cur.match(_ARG_NAME)
    if name is None:
        raise DocHeadError("expected an argument name (a variable)", cur.i)
    type_name = None
    cur.skip_ws()
    if cur.peek() == ":":
        cur.i += 1
        cur.skip_ws()
        depth = 0
        start = cur.i
        while cur.i < len(cur.text):
            ch = cur.text[cur.i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                if depth == 0:
                    break
                depth -= 1
            elif ch == "," and depth == 0:
                break
            cur.i += 1
        type_name = cur.text[start:cur.i].strip()
        if not type_name:
            raise DocHeadError("expected a type name after ':'", start)
    return ArgDoc(mode=mode, name=name, type_name=type_name)


def _invalid_modes(head: DocHead, system: str) -> list[str]:
    vocab = MODE_SYSTEMS[system]
    return [arg.mode for arg in head.args
            if arg.mode is not None and arg.mode not in vocab]


def parse_doc_head(comment_text: str,
                   system: str = "recommended") -> DocHead:
    """Parse a documentation head under the given mode system.

    Raises DocHeadError on malformed input or on a mode specifier that the
    active system does not define (the error names the symbol and system).
    """
    if system not in MODE_SYSTEMS:
        raise ValueError(f"unknown mode system {system!r}")
    head = _parse_structure(comment_text)
    bad = _invalid_modes(head, system)
    if bad:
        raise DocHeadError(
            f"mode specifier '{bad[0]}' is not part of the {system} "
            "system", 0)
    return head


def print_doc_head(head: DocHead) -> str:
    marker = "%%" if head.marker == "double" else "%"
    pieces = []
    for arg in head.args:
        text = (arg.mode or "") + arg.name
        if arg.type_name:
            text += ":" + arg.type_name
        pieces.append(text)
    out = f"{marker} {head.predicate_name}"
    if pieces:
        out += "(" + ", ".join(pieces) + ")"
    if head.determinism:
        out += f" is {head.determinism}"
    return out


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

_CANDIDATE = re.compile(r"[a-z][A-Za-z0-9_]*\s*(\(|is\b|//|$)")


def _diag(rule_id: str, span: Span, message: str,
          predicate: tuple[str, int] | None = None,
          suggestion: str | None = None) -> Diagnostic:
    return Diagnostic(rule_id=rule_id,
                      severity=REGISTRY[rule_id].default_severity,
                      span=span, message=message, suggestion=suggestion,
                      predicate=predicate)


@dataclass
class _DocBlock:
    clause_index: int
    tokens: list[Token]
    heads: list[tuple[DocHead, Token]] = field(default_factory=list)
    failure: tuple[DocHeadError, Token] | None = None

    @property
    def marker(self) -> str:
        text = self.tokens[0].text
        return "double" if text.startswith("%%") or text.startswith("%!") \
            else "single"


def _strip_marker(text: str) -> str:
    m = _MARKER.match(text)
    return text[m.end():].strip() if m else text.strip()


def _collect_blocks(program: Program) -> list[_DocBlock]:
    by_clause: dict[int, list[Token]] = {}
    for attached in program.comments:
        if attached.kind != CommentAttachment.PRECEDING:
            continue
        if attached.token.kind != TokenKind.LINE_COMMENT:
            continue
        if attached.clause_index is None:
            continue
        by_clause.setdefault(attached.clause_index, []).append(attached.token)

    blocks = []
    for clause_index, tokens in sorted(by_clause.items()):
        tokens.sort(key=lambda t: t.span.byte_start)
        block = _DocBlock(clause_index=clause_index, tokens=tokens)
        for position, token in enumerate(tokens):
            stripped = _strip_marker(token.text)
            is_first = position == 0
            looks_like_head = bool(_CANDIDATE.match(stripped))
            if is_first and block.marker == "double":
                looks_like_head = True
            elif not looks_like_head:
                break
            try:
                head = _parse_structure(token.text)
            except DocHeadError as exc:
                if is_first:
                    block.failure = (exc, token)
                break
            head.comment_span = token.span
            block.heads.append((head, token))
        blocks.append(block)
    return blocks


def _called_indicators(clause: Clause) -> set[tuple[str, int]]:
    called: set[tuple[str, int]] = set()
    if clause.body is None:
        return called

    def record(goal: Term) -> None:
        goal = strip_module_qualifier(goal)
        if isinstance(goal, Atom):
            called.add((goal.name, 0))
        elif isinstance(goal, Compound):
            called.add((goal.name, len(goal.args)))
            if goal.name == "\\+" and len(goal.args) == 1:
                for inner in leaf_goals(goal.args[0]):
                    record(inner)

    for goal in leaf_goals(clause.body):
        record(goal)
    return called


def check_docs(program: Program, cfg: Config) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    groups = group_predicates(program)
    blocks = _collect_blocks(program)
    system = cfg.mode_system

    group_of_clause: dict[int, PredicateDef] = {}
    group_index: dict[int, int] = {}
    clause_ids = {id(c): i for i, c in enumerate(program.items)}
    for gi, group in enumerate(groups):
        for clause in group.clauses:
            item_idx = clause_ids[id(clause)]
            group_of_clause[item_idx] = group
            group_index[item_idx] = gi

    documented: set[tuple[str, int]] = set()
    heads_by_group: dict[tuple[str, int], DocHead] = {}

    for block in blocks:
        attached = program.items[block.clause_index]
        if attached.kind == ClauseKind.DIRECTIVE:
            continue
        group = group_of_clause.get(block.clause_index)
        gi = group_index.get(block.clause_index)

        # D02: the head must parse, and its modes must belong to the
        # configured system.
        if block.failure is not None:
            error, token = block.failure
            diags.append(_diag(
                "D02", token.span,
                f"documentation head does not parse: {error.message}",
                predicate=group.indicator if group else None))
        for head, token in block.heads:
            for symbol in _invalid_modes(head, system):
                diags.append(_diag(
                    "D02", token.span,
                    f"mode specifier '{symbol}' is not part of the "
                    f"{system} system", predicate=head.indicator))

        # D03: every head in the block must match an adjacent definition.
        if group is not None and block.heads:
            targets = [g.indicator
                       for g in groups[gi:gi + len(block.heads)]]
            for head, token in block.heads:
                if head.indicator in targets:
                    continue
                name, arity = head.indicator
                if name == group.indicator[0]:
                    message = (f"documented arity {arity}, defined arity "
                               f"{group.indicator[1]} for {name}")
                else:
                    message = (f"doc comment names {name}/{arity}, which is "
                               "not defined adjacent to it")
                diags.append(_diag("D03", token.span, message,
                                   predicate=group.indicator))

        # D04: a main doc comment should state determinism.
        if block.marker == "double":
            for head, token in block.heads:
                if head.determinism is None:
                    name, arity = head.indicator
                    diags.append(_diag(
                        "D04", token.span,
                        f"documentation of {name}/{arity} does not state "
                        "its determinism", predicate=head.indicator))

        # D06: '%%' on a predicate the module does not export.
        if block.marker == "double" and group is not None \
                and program.has_module_directive and not group.exported:
            name, arity = group.indicator
            diags.append(_diag(
                "D06", block.tokens[0].span,
                f"auxiliary predicate {name}/{arity} is documented with "
                "'%%'; use a single '%'", predicate=group.indicator))

        # D07: outputs documented before inputs.
        for head, token in block.heads:
            seen_output: ArgDoc | None = None
            for arg in head.args:
                if arg.mode in _OUTPUT_MODES and seen_output is None:
                    seen_output = arg
                elif arg.mode in _INPUT_MODES and seen_output is not None:
                    diags.append(_diag(
                        "D07", token.span,
                        f"output argument '{seen_output.name}' is "
                        f"documented before input '{arg.name}'; order "
                        "arguments inputs first, outputs last",
                        predicate=head.indicator))
                    break

        if block.marker == "double" and group is not None:
            for head, _token in block.heads:
                if head.predicate_name == group.indicator[0]:
                    documented.add(head.indicator)
        if group is not None:
            for head, _token in block.heads:
                heads_by_group.setdefault(head.indicator, head)

    # D01: which predicates require a main doc comment.
    required: list[PredicateDef] = []
    if program.has_module_directive:
        required = [g for g in groups if g.exported]
        why = "exported"
    else:
        why = "called from other predicates in this file"
        if cfg.require_docs_without_module:
            callers: dict[tuple[str, int], set[int]] = {}
            for gi, group in enumerate(groups):
                for clause in group.clauses:
                    for ind in _called_indicators(clause):
                        callers.setdefault(ind, set()).add(gi)
            pattern = re.compile(cfg.public_name_pattern) \
                if cfg.public_name_pattern else None
            for gi, group in enumerate(groups):
                others = callers.get(group.indicator, set()) - {gi}
                if others or (pattern
                              and pattern.search(group.indicator[0])):
                    required.append(group)
    for group in required:
        if group.indicator in documented:
            continue
        name, arity = group.indicator
        diags.append(_diag(
            "D01", group.clauses[0].span,
            f"predicate {name}/{arity} is {why} but has no '%%' "
            "introductory comment", predicate=group.indicator))

    # D05: clause-head variables should reuse the documented names.
    for group in groups:
        head_doc = heads_by_group.get(group.indicator)
        if head_doc is None:
            continue
        for clause in group.clauses:
            if not isinstance(clause.head, Compound):
                continue
            for position, arg in enumerate(clause.head.args):
                if position >= len(head_doc.args):
                    break
                if not isinstance(arg, Variable) \
                        or arg.name.startswith("_"):
                    continue
                documented_name = head_doc.args[position].name
                if arg.name != documented_name:
                    name, arity = group.indicator
                    diags.append(_diag(
                        "D05", arg.span,
                        f"argument {position + 1} of {name}/{arity} is "
                        f"named {arg.name} here but {documented_name} in "
                        "its documentation", predicate=group.indicator))
    return diags
