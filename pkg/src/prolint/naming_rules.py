"""Naming rules N01-N07: word style of atoms, variables and predicate names.

Quoted atoms are exempt from N01-N04 (their spelling may be data), and
anonymous or underscore-prefixed variables are exempt from everything.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .diagnostics import Config, Diagnostic, REGISTRY
from .reader import (
    Compound,
    Program,
    Term,
    Variable,
    group_predicates,
    is_compound,
    subterms,
)
from .source_model import Span, Token, TokenKind


@dataclass
class IdentifierWords:
    """An identifier split into word segments.

    Segments are split on underscores and on lower-to-upper case
    transitions; rejoining segments with their separators (plus the trailing
    digits) reproduces the original spelling.
    """

    original: str
    segments: list[str]
    separators: list[str]
    trailing_digits: str | None = None

    def rejoin(self) -> str:
        out = []
        for i, seg in enumerate(self.segments):
            out.append(seg)
            if i < len(self.separators):
                out.append(self.separators[i])
        return "".join(out) + (self.trailing_digits or "")


def split_identifier(name: str) -> IdentifierWords:
    base, digits = name, None
    match = re.search(r"^(.*?[^\d])(\d+)$", name)
    if match:
        base, digits = match.group(1), match.group(2)
    segments: list[str] = []
    separators: list[str] = []
    current = ""
    prev = ""
    for ch in base:
        if ch == "_":
            segments.append(current)
            separators.append("_")
            current = ""
        elif prev and prev.islower() and ch.isupper():
            segments.append(current)
            separators.append("")
            current = ch
        else:
            current += ch
        prev = ch
    segments.append(current)
    return IdentifierWords(name, segments, separators, digits)


def _has_intercaps(words: IdentifierWords) -> bool:
    return "" in words.separators


_VOWELS = set("aeiouy")
_NUMBER_WORDS = (
    "one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty"
).split()
_NUMBER_VALUE = {w: i + 1 for i, w in enumerate(_NUMBER_WORDS)}
_ALNUM_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*$")
_LEET = re.compile(r"[A-Za-z][0-9]+[A-Za-z]")
_STATE_SUFFIX = re.compile(r"^(.*[^\d])(\d+)$")
_IN_OUT = re.compile(r"^(.+)_(in|out)$")


def _diag(rule_id: str, span: Span, message: str,
          suggestion: str | None = None) -> Diagnostic:
    return Diagnostic(rule_id=rule_id,
                      severity=REGISTRY[rule_id].default_severity,
                      span=span, message=message, suggestion=suggestion)


def _snake_suggestion(name: str) -> str:
    words = split_identifier(name)
    return "_".join(seg.lower() for seg in words.segments if seg) + \
        (words.trailing_digits or "")


def _variable_suggestion(name: str) -> str:
    words = split_identifier(name)
    fixed = [seg[0].upper() + seg[1:] if seg else seg
             for seg in words.segments]
    return "_".join(seg for seg in fixed if seg) + \
        (words.trailing_digits or "")


def check_naming(program: Program, cfg: Config) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    atom_tokens = _first_occurrences(
        t for t in program.tokens
        if t.kind == TokenKind.ATOM and _ALNUM_ATOM.match(t.text))
    var_tokens = _first_occurrences(
        t for t in program.tokens
        if t.kind == TokenKind.VARIABLE and not t.text.startswith("_"))
    predicates = group_predicates(program)

    diags += _n01_intercaps(atom_tokens, var_tokens)
    diags += _n02_word_caps(var_tokens)
    diags += _n03_pronounceable(atom_tokens, var_tokens, cfg)
    diags += _n04_number_words(atom_tokens, var_tokens, predicates, cfg)
    diags += _n05_aux_suffix(predicates)
    if cfg.enabled("N06"):
        diags += _n06_list_pattern(program)
    diags += _n07_threaded_state(program)
    return diags


def _first_occurrences(tokens) -> list[Token]:
    seen: dict[str, Token] = {}
    for tok in tokens:
        if tok.text not in seen:
            seen[tok.text] = tok
    return sorted(seen.values(), key=lambda t: t.span.byte_start)


# -- N01 --------------------------------------------------------------------

def _n01_intercaps(atoms: list[Token], variables: list[Token]) -> list[Diagnostic]:
    diags = []
    for tok in atoms:
        words = split_identifier(tok.text)
        if _has_intercaps(words):
            suggestion = _snake_suggestion(tok.text)
            diags.append(_diag(
                "N01", tok.span,
                f"atom '{tok.text}' uses internal capitalization; write "
                f"'{suggestion}'", suggestion=suggestion))
    for tok in variables:
        words = split_identifier(tok.text)
        if _has_intercaps(words):
            suggestion = _variable_suggestion(tok.text)
            diags.append(_diag(
                "N01", tok.span,
                f"variable '{tok.text}' uses internal capitalization; "
                f"write '{suggestion}'", suggestion=suggestion))
    return diags


# -- N02 --------------------------------------------------------------------

def _exempt_suffix(segment: str) -> bool:
    return re.fullmatch(r"(in|out|tmp)\d*", segment) is not None


def _n02_word_caps(variables: list[Token]) -> list[Diagnostic]:
    diags = []
    for tok in variables:
        parts = tok.text.split("_")
        bad = False
        for idx, part in enumerate(parts):
            if not part or part[0].isdigit():
                continue
            if idx == len(parts) - 1 and _exempt_suffix(part):
                continue
            if part[0].islower():
                bad = True
        if bad:
            suggestion = "_".join(
                part if (not part or part[0].isdigit()
                         or (idx == len(parts) - 1 and _exempt_suffix(part)))
                else part[0].upper() + part[1:]
                for idx, part in enumerate(parts))
            diags.append(_diag(
                "N02", tok.span,
                f"variable '{tok.text}' has lowercase words; prefer "
                f"'{suggestion}'", suggestion=suggestion))
    return diags


# -- N03 --------------------------------------------------------------------

def _n03_pronounceable(atoms: list[Token], variables: list[Token],
                       cfg: Config) -> list[Diagnostic]:
    diags = []
    for tok in atoms + variables:
        words = split_identifier(tok.text)
        for segment in words.segments:
            letters = [c for c in segment if c.isalpha()]
            if len(segment) < 4 or not letters:
                continue
            if segment.lower() in cfg.pronounceable_allowlist:
                continue
            if not any(c.lower() in _VOWELS for c in letters):
                diags.append(_diag(
                    "N03", tok.span,
                    f"name '{tok.text}' contains the unpronounceable "
                    f"segment '{segment}'"))
                break
    return diags


# -- N04 --------------------------------------------------------------------

def _n04_number_words(atoms: list[Token], variables: list[Token],
                      predicates, cfg: Config) -> list[Diagnostic]:
    diags = []
    defined = {p.indicator[0] for p in predicates}
    flagged: set[str] = set()

    def segments_of(name: str) -> list[str]:
        return [seg.lower() for seg in split_identifier(name).segments if seg]

    for tok in atoms + variables:
        name = tok.text
        if name in flagged:
            continue
        segs = segments_of(name)
        hit: str | None = None
        suggestion: str | None = None
        lowered = name.lower()
        for word in _NUMBER_WORDS:
            if lowered.endswith("_" + word):
                hit = word
                suggestion = name[:len(name) - len(word)] \
                    + str(_NUMBER_VALUE[word])
                break
        if hit is None:
            for idx, seg in enumerate(segs):
                if seg in _NUMBER_VALUE and name in defined:
                    siblings = False
                    for other in _NUMBER_WORDS:
                        if other == seg:
                            continue
                        candidate = segs.copy()
                        candidate[idx] = other
                        if any(segments_of(d) == candidate for d in defined):
                            siblings = True
                            break
                    if siblings:
                        hit = seg
                        fixed = segs.copy()
                        fixed[idx] = str(_NUMBER_VALUE[seg])
                        suggestion = "_".join(fixed)
                        break
        if hit is not None:
            flagged.add(name)
            diags.append(_diag(
                "N04", tok.span,
                f"number word '{hit}' in '{name}'; use a digit "
                f"(e.g. '{suggestion}')", suggestion=suggestion))

    if cfg.leet_enabled:
        for tok in atoms:
            name = tok.text
            if name in flagged or name.lower() in cfg.leet_allowlist:
                continue
            if _LEET.search(name):
                flagged.add(name)
                diags.append(_diag(
                    "N04", tok.span,
                    f"digits embedded between letters in '{name}' make the "
                    "spelling unpredictable"))
    return diags


# -- N05 --------------------------------------------------------------------

def _n05_aux_suffix(predicates) -> list[Diagnostic]:
    diags = []
    for pred in predicates:
        name, arity = pred.indicator
        if name.endswith("_aux"):
            diags.append(Diagnostic(
                rule_id="N05",
                severity=REGISTRY["N05"].default_severity,
                span=pred.clauses[0].span,
                message=f"predicate {name}/{arity} named with '_aux'; "
                        "consider '_case', '_loop', '_unguarded', or the "
                        "same name at a different arity",
                predicate=pred.indicator))
    return diags


# -- N06 --------------------------------------------------------------------

def _n06_acceptable(head: str, tail: str) -> bool:
    if tail == head + "s":
        return True
    stem = tail[:-1] if tail.endswith("s") else tail
    return stem.startswith(head) or head.startswith(stem)


def _n06_list_pattern(program: Program) -> list[Diagnostic]:
    diags = []
    for clause in program.items:
        for root in (clause.head, clause.body):
            if root is None:
                continue
            for term in subterms(root):
                if not is_compound(term, ".", 2):
                    continue
                head, tail = term.args
                if not isinstance(head, Variable) \
                        or not isinstance(tail, Variable):
                    continue
                if head.name.startswith("_") or tail.name.startswith("_"):
                    continue
                if not _n06_acceptable(head.name, tail.name):
                    diags.append(_diag(
                        "N06", term.span,
                        f"list pattern [{head.name}|{tail.name}]: name the "
                        "tail after the element (e.g. "
                        f"[{head.name}|{head.name}s])"))
    return diags


# -- N07 --------------------------------------------------------------------

def _clause_variables(clause) -> list[Variable]:
    out = []
    for root in (clause.head, clause.body):
        if root is None:
            continue
        for term in subterms(root):
            if isinstance(term, Variable):
                out.append(term)
    return out


def _n07_threaded_state(program: Program) -> list[Diagnostic]:
    diags = []
    for clause in program.items:
        variables = _clause_variables(clause)
        names = {}
        for var in variables:
            if not var.name.startswith("_") and var.name not in names:
                names[var.name] = var
        chains: dict[str, set[int]] = {}
        chain_spans: dict[str, Span] = {}
        in_out: list[str] = []
        for name, var in names.items():
            match = _STATE_SUFFIX.match(name)
            if match:
                chains.setdefault(match.group(1), set()).add(
                    int(match.group(2)))
                chain_spans.setdefault(match.group(1), var.span)
            if _IN_OUT.match(name):
                in_out.append(name)
        for base, indices in chains.items():
            missing = sorted(set(range(min(indices), max(indices)))
                             - indices)
            if missing:
                gaps = ", ".join(f"{base}{i}" for i in missing)
                diags.append(_diag(
                    "N07", chain_spans[base],
                    f"threaded state chain {base}0...{base} skips {gaps}"))
        if chains and in_out:
            base = sorted(chains)[0]
            diags.append(_diag(
                "N07", chain_spans[base],
                "clause mixes numbered state variables "
                f"({base}{min(chains[base])}) with the _in/_out convention "
                f"({in_out[0]}); pick one"))
    return diags
