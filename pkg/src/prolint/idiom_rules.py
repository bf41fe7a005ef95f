"""Idiom rules I01-I07: constructs that are almost always wrong, singleton
variables, repeated magic numbers, reminder-tag inventory."""

from __future__ import annotations

from .diagnostics import Config, Diagnostic, REGISTRY, Severity
from .reader import (
    Clause,
    ClauseKind,
    Compound,
    Float,
    Integer,
    Program,
    Term,
    Variable,
    final_goal,
    goal_sequences,
    group_predicates,
    is_atom,
    is_compound,
    leaf_goals,
    strip_module_qualifier,
    subterms,
)
from .source_model import SourceFile, Span, TokenKind


def _diag(rule_id: str, span: Span, message: str,
          severity: Severity | None = None, suggestion: str | None = None,
          predicate: tuple[str, int] | None = None) -> Diagnostic:
    return Diagnostic(rule_id=rule_id,
                      severity=severity or REGISTRY[rule_id].default_severity,
                      span=span, message=message, suggestion=suggestion,
                      predicate=predicate)


def check_idioms(program: Program, src: SourceFile,
                 cfg: Config) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    diags += _i01_terminal_cut(program)
    diags += _i02_repeat_without_cut(program)
    diags += _i03_append_one_element(program)
    diags += _i04_singletons(program)
    diags += _i05_magic_numbers(program, cfg)
    diags += _i06_reminder_tags(program)
    diags += _i07_bare_conjunction(program)
    return diags


# -- I01 --------------------------------------------------------------------

def _i01_terminal_cut(program: Program) -> list[Diagnostic]:
    diags = []
    for pred in group_predicates(program):
        last = pred.clauses[-1]
        if last.body is None:
            continue
        tail = final_goal(last.body)
        if is_atom(tail, "!"):
            name, arity = pred.indicator
            diags.append(_diag(
                "I01", tail.span,
                f"cut at the end of the last clause of {name}/{arity}: "
                "what alternatives is it supposed to eliminate?",
                predicate=pred.indicator))
    return diags


# -- I02 --------------------------------------------------------------------

def _contains_cut(goal: Term) -> bool:
    if is_atom(goal, "!"):
        return True
    if isinstance(goal, Compound) and goal.name in (",", ";", "->", "*->"):
        return any(_contains_cut(a) for a in goal.args)
    return False


def _i02_repeat_without_cut(program: Program) -> list[Diagnostic]:
    diags = []
    for clause in program.items:
        if clause.body is None:
            continue
        for seq in goal_sequences(clause.body):
            for idx, goal in enumerate(seq):
                if not is_atom(goal, "repeat"):
                    continue
                if not any(_contains_cut(later) for later in seq[idx + 1:]):
                    diags.append(_diag(
                        "I02", goal.span,
                        "repeat with no following cut: when will it stop "
                        "repeating?", predicate=clause.indicator))
    return diags


# -- I03 --------------------------------------------------------------------

def _i03_append_one_element(program: Program) -> list[Diagnostic]:
    diags = []
    for clause in program.items:
        if clause.body is None:
            continue
        for goal in leaf_goals(clause.body):
            goal = strip_module_qualifier(goal)
            if not is_compound(goal, "append", 3):
                continue
            first = goal.args[0]
            if is_compound(first, ".", 2) and is_atom(first.args[1], "[]"):
                diags.append(_diag(
                    "I03", goal.span,
                    "append/3 with a one-element list as its first "
                    "argument; use [Element|Rest] instead",
                    suggestion="unify the result with [Element|Rest] "
                    "directly", predicate=clause.indicator))
    return diags


# -- I04 --------------------------------------------------------------------

def collect_variable_counts(clause: Clause) -> dict[str, list[Variable]]:
    """Occurrences of each named variable in a clause; anonymous ``_`` is
    never aggregated."""
    counts: dict[str, list[Variable]] = {}
    for root in (clause.head, clause.body):
        if root is None:
            continue
        for term in subterms(root):
            if isinstance(term, Variable) and term.name != "_":
                counts.setdefault(term.name, []).append(term)
    return counts


def _i04_singletons(program: Program) -> list[Diagnostic]:
    diags = []
    for clause in program.items:
        for name, occurrences in collect_variable_counts(clause).items():
            if name.startswith("_"):
                if len(occurrences) > 1:
                    diags.append(_diag(
                        "I04", occurrences[0].span,
                        f"variable {name} is marked as a singleton by its "
                        f"underscore but occurs {len(occurrences)} times",
                        severity=Severity.INFO,
                        predicate=clause.indicator))
            elif len(occurrences) == 1:
                diags.append(_diag(
                    "I04", occurrences[0].span,
                    f"singleton variable {name}: it occurs only once in "
                    "this clause",
                    suggestion=f"replace {name} with _{name} if intentional",
                    predicate=clause.indicator))
    return diags


# -- I05 --------------------------------------------------------------------

def _i05_magic_numbers(program: Program, cfg: Config) -> list[Diagnostic]:
    by_text: dict[str, list[tuple[Span, object]]] = {}
    for clause in program.items:
        for root in (clause.head, clause.body):
            if root is None:
                continue
            for term in subterms(root):
                if isinstance(term, (Integer, Float)):
                    if term.value in cfg.magic_number_allowlist:
                        continue
                    text = term.lexeme or str(term.value)
                    by_text.setdefault(text, []).append(
                        (term.span, term.value))
    diags = []
    for text in sorted(by_text, key=lambda t: by_text[t][0][0].byte_start):
        occurrences = by_text[text]
        if len(occurrences) < 2:
            continue
        lines = ", ".join(str(span.start_line) for span, _ in occurrences)
        diags.append(_diag(
            "I05", occurrences[0][0],
            f"the number {text} occurs {len(occurrences)} times "
            f"(lines {lines}); isolate it as the argument of a fact",
            suggestion=f"define a fact such as named_constant({text})."))
    return diags


# -- I06 --------------------------------------------------------------------

_TAGS = ("%TBD:", "%FIX:")


def _i06_reminder_tags(program: Program) -> list[Diagnostic]:
    diags = []
    for token in program.tokens:
        if token.kind != TokenKind.LINE_COMMENT:
            continue
        text = token.text
        tag = None
        for candidate in _TAGS:
            if text.startswith(candidate):
                tag = candidate
                break
        if tag is None and text.startswith("%D") \
                and (len(text) == 2 or text[2] in " \t"):
            tag = "%D"
        if tag is not None:
            rest = text[len(tag):].strip()
            summary = f": {rest}" if rest else ""
            diags.append(_diag(
                "I06", token.span,
                f"reminder tag {tag} found{summary}",
                severity=Severity.INFO))
    return diags


# -- I07 --------------------------------------------------------------------

def _i07_bare_conjunction(program: Program) -> list[Diagnostic]:
    diags = []
    for clause in program.items:
        if clause.body is None:
            continue
        for term in subterms(clause.body):
            if not is_compound(term, ";", 2):
                continue
            if term.span.start_line != term.span.end_line:
                continue
            if any(is_compound(arg, ",", 2) and not arg.parenthesized
                   for arg in term.args):
                diags.append(_diag(
                    "I07", term.span,
                    "conjunction mixed with disjunction on one line; add "
                    "parentheses to make the precedence obvious",
                    predicate=clause.indicator))
    return diags
