"""Canonical source rewriter.

The output style: no tabs; every clause head at column 1; one goal per line,
body goals indented one unit; disjunctions and if-then-elses in the compact
parenthesized block form with the closing parenthesis aligned below the
opening one; one extra level between ``repeat`` and its cut; exactly one
blank line between predicates and none between clauses of one predicate.
Comments are preserved: preceding comments stay above their clause, trailing
comments stay on their line when short enough, everything else keeps its
place between the goals.  Atom, string and number lexemes are emitted
verbatim.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .diagnostics import Config, Diagnostic
from .reader import (
    Atom,
    Clause,
    ClauseKind,
    CommentAttachment,
    Compound,
    Float,
    Integer,
    OperatorTable,
    Program,
    Str,
    Term,
    Variable,
    apply_directive_to_table,
    conjunction_goals,
    is_atom,
    is_compound,
)
from .source_model import SourceFile, Span, Token


@dataclass
class FormatStyle:
    indent_size: int = 4
    max_line: int = 79
    eol_comment_max: int = 40

    @classmethod
    def from_config(cls, cfg: Config) -> "FormatStyle":
        return cls(indent_size=cfg.indent_size,
                   max_line=cfg.max_line_length,
                   eol_comment_max=cfg.eol_comment_max)


class FormatError(Exception):
    """Formatting refused; carries the blocking syntax diagnostic."""

    def __init__(self, diagnostic: Diagnostic) -> None:
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


# ---------------------------------------------------------------------------
# Inline term rendering (minimal parentheses under an operator table)
# ---------------------------------------------------------------------------

_PLAIN_ATOM = re.compile(r"[a-z][a-zA-Z0-9_]*$")
_SYMBOLIC_ATOM = re.compile(r"[#$&*+\-./:<=>?@^~\\]+$")
_SOLO_ATOMS = frozenset({"[]", "{}", "!", ";", ",", "|"})


def _atom_text(name: str, lexeme: str | None) -> str:
    if lexeme is not None:
        return lexeme
    if _PLAIN_ATOM.match(name) or _SYMBOLIC_ATOM.match(name) \
            or name in _SOLO_ATOMS:
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'") \
        .replace("\n", "\\n").replace("\t", "\\t")
    return f"'{escaped}'"


class _Renderer:
    def __init__(self, ops: OperatorTable) -> None:
        self.ops = ops

    def priority(self, term: Term) -> int:
        if isinstance(term, Atom) and not term.quoted \
                and not term.parenthesized:
            return self.ops.max_priority(term.name)
        if isinstance(term, Compound):
            if len(term.args) == 2:
                definition = self.ops.infix(term.name)
                if definition:
                    return definition.priority
            elif len(term.args) == 1:
                definition = self.ops.prefix(term.name) \
                    or self.ops.postfix(term.name)
                if definition:
                    return definition.priority
        return 0

    def render(self, term: Term, max_prec: int,
               force_parens: bool = False) -> str:
        text, priority = self._render(term, max_prec)
        if force_parens or priority > max_prec:
            return f"({text})"
        return text

    def _render(self, term: Term, max_prec: int) -> tuple[str, int]:
        if isinstance(term, Variable):
            return term.name, 0
        if isinstance(term, (Integer, Float)):
            return (term.lexeme or str(term.value)), 0
        if isinstance(term, Str):
            return (term.lexeme or f'"{term.text}"'), 0
        if isinstance(term, Atom):
            return _atom_text(term.name, term.lexeme), self.priority(term)
        return self._render_compound(term, max_prec)

    def _render_compound(self, term: Compound,
                         max_prec: int) -> tuple[str, int]:
        name, args = term.name, term.args
        if name == "." and len(args) == 2:
            return self._render_list(term), 0
        if name == "{}" and len(args) == 1:
            return "{" + self.render(args[0], 1200) + "}", 0
        if len(args) == 2:
            definition = self.ops.infix(name)
            if definition:
                p = definition.priority
                left_max = p if definition.type == "yfx" else p - 1
                right_max = p if definition.type == "xfy" else p - 1
                force_left = (is_compound(args[0], ",", 2)
                              and args[0].parenthesized
                              and name in (";", "->", "*->"))
                force_right = (is_compound(args[1], ",", 2)
                               and args[1].parenthesized
                               and name in (";", "->", "*->"))
                left = self.render(args[0], left_max, force_left)
                right = self.render(args[1], right_max, force_right)
                if name == ",":
                    return f"{left}, {right}", p
                if self._renders_tight(name, args, left, right):
                    return f"{left}{name}{right}", p
                return f"{left} {name} {right}", p
        if len(args) == 1:
            definition = self.ops.prefix(name)
            if definition:
                arg_max = definition.priority \
                    - (1 if definition.type == "fx" else 0)
                return (f"{name} {self.render(args[0], arg_max)}",
                        definition.priority)
            definition = self.ops.postfix(name)
            if definition:
                arg_max = definition.priority \
                    - (1 if definition.type == "yf" else 0)
                return (f"{self.render(args[0], arg_max)} {name}",
                        definition.priority)
        rendered = ", ".join(self.render(a, 999) for a in args)
        functor = _atom_text(name, term.functor_lexeme)
        return f"{functor}({rendered})", 0

    def _renders_tight(self, name: str, args: list, left: str,
                       right: str) -> bool:
        """Predicate indicators (``foo/1``) and module qualifications
        (``m:goal``) print without spaces, provided the characters do not
        fuse into a longer symbolic token."""
        if name == "/":
            if not (isinstance(args[0], Atom) and isinstance(args[1], Integer)):
                return False
        elif name != ":":
            return False
        symbolic = "#$&*+-./:<=>?@^~\\"
        return left[-1] not in symbolic and right[0] not in symbolic

    def _render_list(self, term: Compound) -> str:
        elements = []
        node: Term = term
        while is_compound(node, ".", 2):
            elements.append(self.render(node.args[0], 999))
            node = node.args[1]
        if is_atom(node, "[]"):
            return "[" + ", ".join(elements) + "]"
        return "[" + ", ".join(elements) + "|" + self.render(node, 999) + "]"

    # -- width-aware rendering --------------------------------------------

    def wrap(self, term: Term, max_prec: int, col: int, width: int,
             unit: int) -> list[str]:
        """Render ``term`` starting at 1-based column ``col``; continuation
        lines (elements past the first) carry their own leading spaces,
        indented one unit past the start column.  Oversized arguments break
        recursively."""
        inline = self.render(term, max_prec)
        if col - 1 + len(inline) <= width:
            return [inline]
        parts: list[tuple[Term, str]] | None = None
        opener = closer = ""
        if is_compound(term, ".", 2):
            elements: list[tuple[Term, str]] = []
            node: Term = term
            while is_compound(node, ".", 2):
                elements.append((node.args[0], ""))
                node = node.args[1]
            if not is_atom(node, "[]"):
                last_term, _ = elements[-1]
                elements[-1] = (last_term, "|" + self.render(node, 999))
            parts, opener, closer = elements, "[", "]"
        elif isinstance(term, Compound) and term.args \
                and self.priority(term) == 0 and term.name != "{}":
            parts = [(a, "") for a in term.args]
            opener = _atom_text(term.name, term.functor_lexeme) + "("
            closer = ")"
        if parts is None:
            return [inline]

        cont_indent = col - 1 + unit
        lines: list[str] = []
        current = opener
        line_start = col - 1  # absolute offset where `current` begins

        def flush() -> None:
            nonlocal current, line_start
            lines.append(current)
            current = " " * cont_indent
            line_start = 0

        for index, (part_term, glued) in enumerate(parts):
            suffix = ("," if index < len(parts) - 1 else closer)
            tail = glued + suffix
            text = self.render(part_term, 999)
            sep = " " if current.strip() and not current.endswith(opener) \
                else ""
            room = width - line_start - len(current) - len(sep)
            if len(text) + len(tail) <= room:
                current += sep + text + tail
                continue
            if current.strip() not in ("", opener.strip()):
                flush()
            fresh_room = width - line_start - len(current)
            if len(text) + len(tail) <= fresh_room:
                current += text + tail
                continue
            sub = self.wrap(part_term, 999,
                            line_start + len(current) + 1, width, unit)
            current += sub[0]
            for piece in sub[1:]:
                flush()
                current = piece
                line_start = 0
            current += tail
        lines.append(current)
        return lines


# ---------------------------------------------------------------------------
# Clause emission
# ---------------------------------------------------------------------------


@dataclass
class _Out:
    """Emitted lines tagged with their source-line range and a per-goal
    unit id (continuation lines of one goal share the id)."""

    lines: list[str] = field(default_factory=list)
    spans: list[tuple[int, int] | None] = field(default_factory=list)
    units: list[int | None] = field(default_factory=list)

    def add(self, text: str, src: tuple[int, int] | None,
            unit: int | None = None) -> None:
        self.lines.append(text)
        self.spans.append(src)
        self.units.append(unit)


class _ClauseFormatter:
    def __init__(self, renderer: _Renderer, style: FormatStyle,
                 interior: list[Token]) -> None:
        self.r = renderer
        self.style = style
        self.unit = style.indent_size
        self.width = style.max_line
        self.interior = sorted(interior, key=lambda t: t.span.byte_start)
        self.next_comment = 0
        self.out = _Out()
        self._unit_counter = 0

    def _new_unit(self) -> int:
        self._unit_counter += 1
        return self._unit_counter

    def flush_comments(self, before_byte: int, indent: int) -> None:
        while self.next_comment < len(self.interior):
            token = self.interior[self.next_comment]
            if token.span.byte_start >= before_byte:
                break
            self.out.add(" " * indent + token.text.rstrip(), None)
            self.next_comment += 1

    def flush_remaining(self, indent: int) -> None:
        while self.next_comment < len(self.interior):
            token = self.interior[self.next_comment]
            self.out.add(" " * indent + token.text.rstrip(), None)
            self.next_comment += 1

    # -- entry points -------------------------------------------------------

    def format_clause(self, clause: Clause) -> _Out:
        if clause.kind == ClauseKind.DIRECTIVE:
            self.emit_directive(clause)
        elif clause.kind == ClauseKind.FACT:
            self.emit_head(clause.head, clause, neck=None, terminal=".")
        else:
            neck = ":-" if clause.kind == ClauseKind.RULE else "-->"
            self.emit_head(clause.head, clause, neck=neck, terminal=None)
            self.emit_sequence(clause.body, self.unit, final_suffix=".")
            self.flush_remaining(self.unit)
        return self.out

    def emit_directive(self, clause: Clause) -> None:
        goals = conjunction_goals(clause.body)
        src = (clause.span.start_line, clause.span.end_line)
        if len(goals) == 1:
            uid = self._new_unit()
            pieces = self.r.wrap(clause.body, 1199, 4, self.width, self.unit)
            self.out.add(":- " + pieces[0] + ("." if len(pieces) == 1 else ""),
                         src, uid)
            for piece in pieces[1:]:
                self.out.add(piece, src, uid)
            if len(pieces) > 1:
                self.out.lines[-1] += "."
            return
        for index, goal in enumerate(goals):
            prefix = ":- " if index == 0 else " " * self.unit
            suffix = "," if index < len(goals) - 1 else "."
            text = self.r.render(goal, 999)
            self.out.add(prefix + text + suffix,
                         (goal.span.start_line, goal.span.end_line),
                         self._new_unit())

    def emit_head(self, head: Term, clause: Clause, neck: str | None,
                  terminal: str | None) -> None:
        src = (head.span.start_line, clause.neck_span.end_line
               if clause.neck_span else head.span.end_line)
        uid = self._new_unit()
        inline = self.r.render(head, 1199)
        tail = ("." if terminal else f" {neck}")
        if len(inline) + len(tail) <= self.width:
            self.out.add(inline + tail, src, uid)
            return
        # Break after the head's opening parenthesis; the argument block is
        # indented one unit and the closer returns to column 1.
        if isinstance(head, Compound) and self.r.priority(head) == 0:
            opener = _atom_text(head.name, head.functor_lexeme) + "("
            self.out.add(opener, src, uid)
            current = " " * self.unit
            for index, arg in enumerate(head.args):
                suffix = "," if index < len(head.args) - 1 else ""
                rendered = self.r.render(arg, 999)
                if current.strip() and \
                        len(current) + 1 + len(rendered + suffix) > self.width:
                    self.out.add(current, src, uid)
                    current = " " * self.unit
                if len(current) + len(rendered + suffix) > self.width \
                        and not current.strip():
                    pieces = self.r.wrap(arg, 999, len(current) + 1,
                                         self.width, self.unit)
                    current += pieces[0]
                    for piece in pieces[1:]:
                        self.out.add(current, src, uid)
                        current = piece
                    current += suffix
                    continue
                if current.strip():
                    current += " "
                current += rendered + suffix
            self.out.add(current, src, uid)
            self.out.add(")" + tail, src, uid)
        else:
            self.out.add(inline + tail, src, uid)

    # -- bodies --------------------------------------------------------------

    def emit_sequence(self, body: Term, indent: int,
                      final_suffix: str = "",
                      lead: str | None = None) -> None:
        goals = conjunction_goals(body)
        cut_pending = 0
        for index, goal in enumerate(goals):
            last = index == len(goals) - 1
            suffix = final_suffix if last else ","
            if is_atom(goal, "!") and cut_pending:
                cut_pending -= 1
            extra = cut_pending * self.unit
            self.flush_comments(goal.span.byte_start, indent + extra)
            self.emit_goal(goal, indent + extra, suffix,
                           lead if index == 0 else None)
            if is_atom(goal, "repeat") and any(
                    _mentions_cut(later) for later in goals[index + 1:]):
                cut_pending += 1

    def emit_goal(self, goal: Term, indent: int, suffix: str,
                  lead: str | None = None) -> None:
        if isinstance(goal, Compound) and len(goal.args) == 2 \
                and goal.name in (";", "->", "*->"):
            self.emit_block(goal, indent, suffix, lead)
            return
        if is_compound(goal, ",", 2):
            self.emit_group(goal, indent, suffix, lead)
            return
        src = (goal.span.start_line, goal.span.end_line)
        uid = self._new_unit()
        pieces = self.r.wrap(goal, 999, indent + 1, self.width, self.unit)
        first = " " * indent + pieces[0] if lead is None else lead + pieces[0]
        self.out.add(first, src, uid)
        for piece in pieces[1:]:
            self.out.add(piece, src, uid)
        self.out.lines[-1] += suffix

    def emit_group(self, group: Compound, indent: int, suffix: str,
                   lead: str | None = None) -> None:
        """A parenthesized conjunction used as a single goal."""
        pad = " " * indent
        opener = pad + "(" + " " * (self.unit - 1)
        content = indent + self.unit
        inner = Compound(group.name, group.args, group.span)
        self.emit_sequence(inner, content, final_suffix="",
                           lead=opener if lead is None else
                           lead + "(" + " " * (self.unit - 1))
        self.out.add(pad + ")" + suffix,
                     (group.span.end_line, group.span.end_line),
                     self._new_unit())

    def emit_block(self, root: Compound, indent: int, suffix: str,
                   lead: str | None = None) -> None:
        pad = " " * indent
        content = indent + self.unit
        # The block's own parentheses consume the root's parenthesization;
        # only parentheses on nested subterms are the author's.
        branches = _branches(root)
        for index, branch in enumerate(branches):
            if lead is not None and index == 0:
                prefix = lead + "(" + " " * (self.unit - 1)
            elif index == 0:
                prefix = pad + "(" + " " * (self.unit - 1)
            else:
                prefix = pad + ";" + " " * (self.unit - 1)
            as_ite = branch is root or (
                isinstance(branch, Compound) and len(branch.args) == 2
                and branch.name in ("->", "*->")
                and not branch.parenthesized)
            self.emit_branch(branch, content, prefix, as_ite)
        self.out.add(pad + ")" + suffix,
                     (root.span.end_line, root.span.end_line),
                     self._new_unit())

    def emit_branch(self, branch: Term, indent: int, prefix: str,
                    as_ite: bool) -> None:
        if as_ite and isinstance(branch, Compound) \
                and len(branch.args) == 2 \
                and branch.name in ("->", "*->"):
            condition, then_part = branch.args
            arrow = branch.name
            cond_goals = conjunction_goals(condition)
            for index, goal in enumerate(cond_goals):
                last = index == len(cond_goals) - 1
                suffix = f" {arrow}" if last else ","
                self.flush_comments(goal.span.byte_start, indent)
                self.emit_goal(goal, indent, suffix,
                               prefix if index == 0 else None)
            self.emit_sequence(then_part, indent, final_suffix="")
        else:
            self.emit_sequence(branch, indent, final_suffix="", lead=prefix)


def _mentions_cut(goal: Term) -> bool:
    if is_atom(goal, "!"):
        return True
    if isinstance(goal, Compound) and goal.name in (",", ";", "->", "*->"):
        return any(_mentions_cut(a) for a in goal.args)
    return False


def _branches(root: Compound) -> list[Term]:
    """Flatten a right-nested, unparenthesized ``;`` chain into its branch
    list; anything parenthesized stays whole to preserve term structure."""
    if root.name in ("->", "*->"):
        return [root]
    out: list[Term] = []
    stack: list[tuple[Term, bool]] = [(root, True)]
    while stack:
        term, at_root = stack.pop()
        if is_compound(term, ";", 2) and (at_root or not term.parenthesized):
            stack.append((term.args[1], False))
            stack.append((term.args[0], False))
        else:
            out.append(term)
    return out


# ---------------------------------------------------------------------------
# Program assembly
# ---------------------------------------------------------------------------


@dataclass
class _Unit:
    kind: str  # "clause" or "comment"
    start_line: int
    end_line: int
    clause: Clause | None = None
    indicator: tuple[str, int] | None = None
    is_directive: bool = False
    preceding: list[Token] = field(default_factory=list)
    comment: Token | None = None


def _collect_units(program: Program) -> tuple[list[_Unit], dict[int, list[Token]],
                                              dict[int, list[Token]]]:
    preceding: dict[int, list[Token]] = {}
    trailing: dict[int, list[Token]] = {}
    interior: dict[int, list[Token]] = {}
    free_comments: list[Token] = []

    for attached in program.comments:
        token = attached.token
        if attached.kind == CommentAttachment.PRECEDING \
                and attached.clause_index is not None:
            preceding.setdefault(attached.clause_index, []).append(token)
        elif attached.kind == CommentAttachment.TRAILING \
                and attached.clause_index is not None:
            trailing.setdefault(attached.clause_index, []).append(token)
        else:
            placed = False
            for idx, clause in enumerate(program.items):
                if clause.span.byte_start < token.span.byte_start \
                        < clause.span.byte_end:
                    interior.setdefault(idx, []).append(token)
                    placed = True
                    break
            if not placed:
                free_comments.append(token)

    units: list[_Unit] = []
    for idx, clause in enumerate(program.items):
        ahead = sorted(preceding.get(idx, []),
                       key=lambda t: t.span.byte_start)
        start = ahead[0].span.start_line if ahead else clause.span.start_line
        units.append(_Unit(
            kind="clause", start_line=start, end_line=clause.span.end_line,
            clause=clause, indicator=clause.indicator,
            is_directive=clause.kind == ClauseKind.DIRECTIVE,
            preceding=ahead))
    for token in free_comments:
        units.append(_Unit(kind="comment",
                           start_line=token.span.start_line,
                           end_line=token.span.end_line, comment=token))
    units.sort(key=lambda u: u.start_line)
    return units, trailing, interior


def _gap(previous: _Unit | None, unit: _Unit) -> int:
    if previous is None:
        return 0
    if previous.kind == "clause" and unit.kind == "clause" \
            and not previous.is_directive and not unit.is_directive:
        return 0 if previous.indicator == unit.indicator else 1
    raw = unit.start_line - previous.end_line - 1
    return max(0, min(raw, 2))


def _clause_index_map(program: Program) -> dict[int, int]:
    return {id(clause): idx for idx, clause in enumerate(program.items)}


def format_program(program: Program, style: FormatStyle | None = None) -> str:
    """Rewrite a parsed program in the canonical style.

    Raises FormatError when the program carries any syntax diagnostic; a
    broken parse cannot be reprinted faithfully.
    """
    style = style or FormatStyle()
    if program.syntax_diagnostics:
        raise FormatError(program.syntax_diagnostics[0])

    units, trailing, interior = _collect_units(program)
    index_of = _clause_index_map(program)
    table = OperatorTable.default()
    output: list[str] = []
    previous: _Unit | None = None

    for unit in units:
        output.extend([""] * _gap(previous, unit))
        if unit.kind == "comment":
            output.append(unit.comment.text.rstrip())
            previous = unit
            continue
        clause = unit.clause
        for token in unit.preceding:
            output.append(token.text.rstrip())
        idx = index_of[id(clause)]
        renderer = _Renderer(table)
        formatter = _ClauseFormatter(renderer, style,
                                     interior.get(idx, []))
        out = formatter.format_clause(clause)
        _attach_trailing(out, trailing.get(idx, []), style)
        output.extend(out.lines)
        if clause.kind == ClauseKind.DIRECTIVE:
            apply_directive_to_table(clause.body, table)
        previous = unit

    if not output:
        return ""
    return "\n".join(output) + "\n"


def _attach_trailing(out: _Out, comments: list[Token],
                     style: FormatStyle) -> None:
    from .diagnostics import SUPPRESSION_COMMENT

    for token in sorted(comments, key=lambda t: t.span.byte_start):
        line_no = token.span.start_line
        text = token.text.rstrip()
        target = None
        if SUPPRESSION_COMMENT.search(text):
            # Suppression comments only act on the clause's first line.
            target = 0
        else:
            for idx in range(len(out.lines) - 1, -1, -1):
                span = out.spans[idx]
                if span is not None and span[0] <= line_no <= span[1]:
                    target = idx
                    break
        if target is None:
            target = len(out.lines) - 1
        candidate = out.lines[target] + " " + text
        if len(candidate) <= style.max_line \
                and len(text) <= style.eol_comment_max:
            out.lines[target] = candidate
        else:
            first = target
            uid = out.units[target]
            while first > 0 and uid is not None \
                    and out.units[first - 1] == uid:
                first -= 1
            indent = len(out.lines[first]) - len(out.lines[first].lstrip())
            out.lines.insert(first, " " * indent + text)
            out.spans.insert(first, None)
            out.units.insert(first, None)


def check_format(src: SourceFile, program: Program,
                 style: FormatStyle | None = None) -> tuple[bool, Span | None]:
    """True when the source text is already canonical; otherwise the span of
    the first divergence."""
    formatted = format_program(program, style)
    original = src.content
    if formatted == original:
        return True, None
    limit = min(len(formatted), len(original))
    offset = next((i for i in range(limit)
                   if formatted[i] != original[i]), limit)
    line = original.count("\n", 0, offset) + 1
    col = offset - (original.rfind("\n", 0, offset) + 1) + 1
    return False, Span(line, col, line, col + 1, offset, offset + 1)
