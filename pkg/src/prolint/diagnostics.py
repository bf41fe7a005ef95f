"""Rule registry, configuration, execution harness, and result rendering."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Callable

if TYPE_CHECKING:
    from .reader import Program
    from .source_model import SourceFile, Span


class Severity(enum.IntEnum):
    """Diagnostic severity, totally ordered error > warning > info > hint."""

    HINT = 10
    INFO = 20
    WARNING = 30
    ERROR = 40

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_name(cls, name: str) -> "Severity":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown severity {name!r}") from None


@dataclass
class Diagnostic:
    """One lint finding.  The message always names the offending data."""

    rule_id: str
    severity: Severity
    span: "Span"
    message: str
    suggestion: str | None = None
    predicate: tuple[str, int] | None = None
    path: str = ""

    def sort_key(self) -> tuple:
        return (self.path, self.span.start_line, self.span.start_col,
                self.rule_id)


@dataclass(frozen=True)
class RuleDescriptor:
    rule_id: str
    title: str
    guideline_ref: str
    default_severity: Severity
    parameters: tuple[str, ...] = ()
    default_enabled: bool = True


#: Diagnostics that report broken input; they cannot be disabled, have their
#: severity overridden, or be suppressed by comments.
NON_SUPPRESSIBLE = frozenset({"E01", "E02", "E99"})

_CATALOG: list[RuleDescriptor] = [
    RuleDescriptor("E01", "lexical error", "Source must tokenize.",
                   Severity.ERROR),
    RuleDescriptor("E02", "syntax error", "Source must parse.",
                   Severity.ERROR),
    RuleDescriptor("E99", "internal error", "Checker rules must not crash.",
                   Severity.ERROR),
    RuleDescriptor("L01", "tab indentation",
                   "Indent with spaces, never with tabs.", Severity.WARNING),
    RuleDescriptor("L02", "inconsistent indentation",
                   "Indent body lines by whole levels of indent_size spaces.",
                   Severity.WARNING, ("indent_size",)),
    RuleDescriptor("L03", "line too long",
                   "Keep source lines within the configured width.",
                   Severity.WARNING, ("max_line_length",)),
    RuleDescriptor("L04", "clause too long",
                   "Keep each clause short enough to read on one screen.",
                   Severity.INFO, ("clause_lines_info", "clause_lines_warn")),
    RuleDescriptor("L05", "several subgoals on one line",
                   "Put each subgoal on its own line.",
                   Severity.WARNING, ("inline_goal_allowlist",)),
    RuleDescriptor("L06", "clause head not at left margin",
                   "Begin every clause on a new line at column 1.",
                   Severity.WARNING),
    RuleDescriptor("L07", "comma spacing",
                   "Be consistent with spacing after commas.",
                   Severity.WARNING, ("comma_style",)),
    RuleDescriptor("L08", "disjunction layout",
                   "Lay out disjunctions so semicolons stand out and the "
                   "closing parenthesis sits below the opening one.",
                   Severity.WARNING),
    RuleDescriptor("L09", "repeat loop indentation",
                   "Indent one extra level between repeat and its cut.",
                   Severity.WARNING, ("indent_size",)),
    RuleDescriptor("L10", "long end-of-line comment",
                   "Keep comments to the right of code very short.",
                   Severity.HINT, ("eol_comment_max",)),
    RuleDescriptor("L11", "missing file header",
                   "Start every source file with a header comment.",
                   Severity.HINT),
    RuleDescriptor("L12", "vertical spacing",
                   "Separate predicates with a blank line; keep clauses of "
                   "one predicate together.", Severity.HINT),
    RuleDescriptor("N01", "intercaps identifier",
                   "Separate words with underscores, not internal "
                   "capitalization.", Severity.WARNING),
    RuleDescriptor("N02", "variable word capitalization",
                   "Capitalize each underscore-separated word of a variable "
                   "name.", Severity.HINT),
    RuleDescriptor("N03", "unpronounceable name",
                   "Make all names pronounceable.", Severity.HINT,
                   ("n03.allowlist",)),
    RuleDescriptor("N04", "number word in name",
                   "Within names, write numbers as digits, not words.",
                   Severity.HINT, ("n04.leet.enabled", "n04.leet.allowlist")),
    RuleDescriptor("N05", "_aux predicate name",
                   "Prefer a purposeful suffix (_case, _loop, _unguarded) or "
                   "a different arity over _aux.", Severity.HINT),
    RuleDescriptor("N06", "list element/tail naming",
                   "Match a list against [Element|Elements]: singular head, "
                   "plural tail.", Severity.HINT, ("n06.enabled",),
                   default_enabled=False),
    RuleDescriptor("N07", "threaded state naming",
                   "Name threaded state variables consistently "
                   "(State0, State1, ..., State).", Severity.HINT),
    RuleDescriptor("D01", "undocumented predicate",
                   "Document every predicate callable from elsewhere with an "
                   "introductory comment.", Severity.WARNING,
                   ("require_docs_without_module", "public_name_pattern")),
    RuleDescriptor("D02", "malformed documentation head",
                   "Write documentation heads in the configured mode "
                   "vocabulary.", Severity.WARNING, ("mode_system",)),
    RuleDescriptor("D03", "documentation mismatch",
                   "Keep documentation heads consistent with the documented "
                   "predicate's name and arity.", Severity.WARNING),
    RuleDescriptor("D04", "missing determinism",
                   "State the determinism (det/semidet/multi/nondet) of every "
                   "documented predicate.", Severity.INFO),
    RuleDescriptor("D05", "argument name mismatch",
                   "Use the documented argument names in clause heads where "
                   "practical.", Severity.HINT),
    RuleDescriptor("D06", "marker misuse",
                   "Reserve '%%' for predicates used elsewhere; introduce "
                   "auxiliaries with '%'.", Severity.HINT),
    RuleDescriptor("D07", "outputs before inputs",
                   "Order documented arguments inputs first, outputs last.",
                   Severity.HINT),
    RuleDescriptor("I01", "cut ends last clause",
                   "A cut at the end of the last clause of a predicate is "
                   "almost always wrong.", Severity.WARNING),
    RuleDescriptor("I02", "repeat without cut",
                   "A repeat not followed by a cut never stops repeating.",
                   Severity.WARNING),
    RuleDescriptor("I03", "append with one-element list",
                   "Use [Element|Rest] instead of append/3 with a one-element "
                   "first argument.", Severity.HINT),
    RuleDescriptor("I04", "singleton variable",
                   "A named variable occurring once in a clause is usually a "
                   "typo.", Severity.WARNING),
    RuleDescriptor("I05", "repeated magic number",
                   "Isolate a number that occurs more than once as the "
                   "argument of a fact.", Severity.HINT,
                   ("magic_number_allowlist",)),
    RuleDescriptor("I06", "reminder tag",
                   "Inventory of %TBD:, %FIX: and %D reminder comments.",
                   Severity.INFO),
    RuleDescriptor("I07", "unparenthesized conjunction in disjunction",
                   "Use parentheses to make the precedence of , against ; "
                   "obvious.", Severity.HINT),
]

REGISTRY: dict[str, RuleDescriptor] = {d.rule_id: d for d in _CATALOG}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

_DEFAULT_INLINE_GOALS = frozenset(
    {("write", 1), ("nl", 0), ("print", 1),
     ("format", 1), ("format", 2), ("format", 3)}
)


@dataclass
class Config:
    indent_size: int = 4
    max_line_length: int = 79
    clause_lines_info: int = 24
    clause_lines_warn: int = 48
    eol_comment_max: int = 40
    magic_number_allowlist: frozenset = frozenset({0, 1, -1, 2})
    inline_goal_allowlist: frozenset = _DEFAULT_INLINE_GOALS
    mode_system: str = "recommended"
    comma_style: str = "simple"
    failure_threshold: Severity = Severity.WARNING
    extensions: tuple[str, ...] = (".pl", ".pro", ".prolog")
    pronounceable_allowlist: frozenset = frozenset(
        {"src", "msg", "tmp", "str", "ptr", "cfg", "db"})
    leet_enabled: bool = False
    leet_allowlist: frozenset = frozenset({"i18n", "l10n"})
    require_docs_without_module: bool = True
    public_name_pattern: str | None = None
    rule_enabled: dict = field(default_factory=dict)
    rule_severity: dict = field(default_factory=dict)
    problems: list = field(default_factory=list)

    def enabled(self, rule_id: str) -> bool:
        if rule_id in self.rule_enabled:
            return self.rule_enabled[rule_id]
        desc = REGISTRY.get(rule_id)
        return desc.default_enabled if desc else True

    def severity_for(self, rule_id: str,
                     intrinsic: Severity | None = None) -> Severity:
        if rule_id in self.rule_severity and rule_id not in NON_SUPPRESSIBLE:
            return self.rule_severity[rule_id]
        if intrinsic is not None:
            return intrinsic
        desc = REGISTRY.get(rule_id)
        return desc.default_severity if desc else Severity.WARNING


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _parse_int(value: str) -> int:
    return int(value.strip())

def _parse_number(value: str):
    text = value.strip()
    try:
        return int(text)
    except ValueError:
        return float(text)


def _parse_name_list(value: str) -> frozenset:
    return frozenset(v.strip() for v in value.split(",") if v.strip())


def _parse_number_list(value: str) -> frozenset:
    return frozenset(_parse_number(v) for v in value.split(",") if v.strip())


def _parse_indicator_list(value: str) -> frozenset:
    out = set()
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, arity = item.partition("/")
        out.add((name.strip(), int(arity.strip())))
    return frozenset(out)


def _parse_extensions(value: str) -> tuple[str, ...]:
    exts = []
    for item in value.split(","):
        item = item.strip()
        if item and not item.startswith("."):
            item = "." + item
        if item:
            exts.append(item)
    return tuple(exts)


def _parse_choice(*choices: str) -> Callable[[str], str]:
    def parse(value: str) -> str:
        v = value.strip()
        if v not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}")
        return v
    return parse


_SCALAR_KEYS: dict[str, tuple[str, Callable]] = {
    "indent_size": ("indent_size", _parse_int),
    "max_line_length": ("max_line_length", _parse_int),
    "clause_lines_info": ("clause_lines_info", _parse_int),
    "clause_lines_warn": ("clause_lines_warn", _parse_int),
    "eol_comment_max": ("eol_comment_max", _parse_int),
    "magic_number_allowlist": ("magic_number_allowlist", _parse_number_list),
    "inline_goal_allowlist": ("inline_goal_allowlist", _parse_indicator_list),
    "mode_system": ("mode_system",
                    _parse_choice("recommended", "pldoc", "simple")),
    "comma_style": ("comma_style", _parse_choice("simple", "structured")),
    "fail_on": ("failure_threshold", Severity.from_name),
    "extensions": ("extensions", _parse_extensions),
    "n03.allowlist": ("pronounceable_allowlist", _parse_name_list),
    "n04.leet.enabled": ("leet_enabled", _parse_bool),
    "n04.leet.allowlist": ("leet_allowlist", _parse_name_list),
    "require_docs_without_module": ("require_docs_without_module",
                                    _parse_bool),
    "public_name_pattern": ("public_name_pattern", lambda v: v.strip()),
}

_RULE_KEY = re.compile(r"rule\.([A-Za-z][A-Za-z0-9]*)\.(enabled|severity)$")


def _config_problem(cfg: Config, severity: Severity, line: int,
                    message: str, path: str) -> None:
    from .source_model import Span  # deferred: source_model imports this module

    cfg.problems.append(
        Diagnostic(rule_id="C01", severity=severity,
                   span=Span(line, 1, line, 1, 0, 0),
                   message=message, path=path))


def load_config(text: str, path: str = "<config>") -> Config:
    """Parse the key=value configuration document.

    Unknown keys and rule ids are reported (as warnings in ``problems``),
    never silently ignored; malformed lines are reported as errors.  The
    returned Config always carries usable values (defaults where a line was
    rejected).
    """
    cfg = Config()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            _config_problem(cfg, Severity.ERROR, lineno,
                            f"malformed configuration line: {raw.strip()!r} "
                            "(expected key = value)", path)
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        rule_match = _RULE_KEY.match(key)
        if key == "n06.enabled":
            rule_match = None
            key = "rule.N06.enabled"
            rule_match = _RULE_KEY.match(key)
        if rule_match:
            rule_id, attr = rule_match.group(1).upper(), rule_match.group(2)
            if rule_id not in REGISTRY:
                _config_problem(cfg, Severity.WARNING, lineno,
                                f"unknown rule id {rule_id!r}", path)
                continue
            try:
                if attr == "enabled":
                    cfg.rule_enabled[rule_id] = _parse_bool(value)
                else:
                    cfg.rule_severity[rule_id] = Severity.from_name(value)
            except ValueError as exc:
                _config_problem(cfg, Severity.ERROR, lineno,
                                f"bad value for {key}: {exc}", path)
            continue
        if key in _SCALAR_KEYS:
            attr, parser = _SCALAR_KEYS[key]
            try:
                setattr(cfg, attr, parser(value))
            except ValueError as exc:
                _config_problem(cfg, Severity.ERROR, lineno,
                                f"bad value for {key}: {exc}", path)
            continue
        _config_problem(cfg, Severity.WARNING, lineno,
                        f"unknown configuration key {key!r}", path)
    return cfg


# ---------------------------------------------------------------------------
# Execution harness
# ---------------------------------------------------------------------------

#: Suppression-comment syntax, recognized on a clause's first line.
SUPPRESSION_COMMENT = re.compile(
    r"%+\s*prolint:\s*allow\s+([A-Za-z0-9_]+(?:\s*,\s*[A-Za-z0-9_]+)*)")


def _suppressed_ranges(program: "Program") -> list[tuple[int, int, frozenset]]:
    """Clause line ranges whose head line carries a ``% prolint: allow``
    comment, with the rule ids it names."""
    ranges = []
    trailing_by_line: dict[int, set[str]] = {}
    for attached in program.comments:
        if attached.kind.value != "trailing":
            continue
        m = SUPPRESSION_COMMENT.search(attached.token.text)
        if m:
            ids = {part.strip().upper() for part in m.group(1).split(",")}
            line = attached.token.span.start_line
            trailing_by_line.setdefault(line, set()).update(ids)
    for clause in program.items:
        ids = trailing_by_line.get(clause.span.start_line)
        if ids:
            ranges.append((clause.span.start_line, clause.span.end_line,
                           frozenset(ids)))
    return ranges


def run(src: "SourceFile", program: "Program", cfg: Config) -> list[Diagnostic]:
    """Run every enabled rule plus the collected syntax diagnostics.

    A rule that raises internally becomes one E99 diagnostic; the run itself
    never crashes.  Output is sorted by (line, column, rule id).
    """
    # Imported here: the rule modules import this module for Diagnostic.
    from . import doc_rules, idiom_rules, layout_rules, naming_rules
    from .source_model import Span

    diags: list[Diagnostic] = list(program.syntax_diagnostics)
    checkers = [
        lambda: layout_rules.check_layout(src, program.tokens, program, cfg),
        lambda: naming_rules.check_naming(program, cfg),
        lambda: doc_rules.check_docs(program, cfg),
        lambda: idiom_rules.check_idioms(program, src, cfg),
    ]
    for checker in checkers:
        try:
            diags.extend(checker())
        except Exception as exc:  # internal failure must not kill the run
            diags.append(
                Diagnostic(rule_id="E99", severity=Severity.ERROR,
                           span=Span(1, 1, 1, 1, 0, 0),
                           message=f"internal rule failure: {exc}"))

    suppressions = _suppressed_ranges(program)
    out: list[Diagnostic] = []
    for diag in diags:
        if diag.rule_id in NON_SUPPRESSIBLE:
            out.append(replace(diag, path=src.path))
            continue
        if not cfg.enabled(diag.rule_id):
            continue
        if any(start <= diag.span.start_line <= end and diag.rule_id in ids
               for start, end, ids in suppressions):
            continue
        severity = cfg.rule_severity.get(diag.rule_id, diag.severity)
        out.append(replace(diag, severity=severity, path=src.path))
    out.sort(key=lambda d: (d.span.start_line, d.span.start_col, d.rule_id))
    return out


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def render_text(diags: list[Diagnostic]) -> str:
    """One ``path:line:col: severity [RULE] message`` line per diagnostic."""
    lines = [
        f"{d.path}:{d.span.start_line}:{d.span.start_col}: "
        f"{d.severity.label} [{d.rule_id}] {d.message}"
        for d in diags
    ]
    return "".join(line + "\n" for line in lines)


def render_json(diags: list[Diagnostic]) -> str:
    entries = []
    counts = {sev.label: 0 for sev in
              (Severity.ERROR, Severity.WARNING, Severity.INFO, Severity.HINT)}
    for d in diags:
        counts[d.severity.label] += 1
        entries.append({
            "path": d.path,
            "line": d.span.start_line,
            "col": d.span.start_col,
            "end_line": d.span.end_line,
            "end_col": d.span.end_col,
            "rule": d.rule_id,
            "severity": d.severity.label,
            "message": d.message,
            "suggestion": d.suggestion,
            "predicate": (f"{d.predicate[0]}/{d.predicate[1]}"
                          if d.predicate else None),
        })
    document = {"diagnostics": entries, "summary": counts}
    return json.dumps(document, indent=2) + "\n"
