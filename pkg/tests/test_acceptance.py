"""Acceptance suite: one criterion per test, one PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines as they print.
"""

from __future__ import annotations

import json
import random
from contextlib import contextmanager

import pytest

from prolint import (
    Config,
    Severity,
    format_program,
    program_from_source,
    render_json,
    render_text,
    run,
    source_from_text,
    structurally_equal,
)
from prolint.cli import main
from prolint.doc_rules import (
    DETERMINISM_SPECIFIERS,
    DocHeadError,
    MODE_SYSTEMS,
    parse_doc_head,
    print_doc_head,
)
from prolint.reader import read_term
from prolint.source_model import scan

from conftest import lint_text
from gen import expression_table, gen_doc_head, gen_expression
from oracles import shunting_yard, term_to_tuple
from snippets import (
    CLEAN_SNIPPETS,
    COUNT_UP,
    PROCESS_QUERIES,
    SUM_LIST_BUGGY,
)
from test_formatter import formatter_corpus


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} FAIL: {description}")
        raise
    print(f"ACCEPTANCE {number} PASS: {description}")


def idset(diags, prefix=""):
    return {d.rule_id for d in diags if d.rule_id.startswith(prefix)}


def test_criterion_1_exemplar_snippets_lint_clean():
    with criterion(1, "canonical exemplar snippets produce nothing at "
                      "warning level or above"):
        for name, text in CLEAN_SNIPPETS.items():
            diags = lint_text(text, path=name)
            noisy = [d for d in diags if d.severity >= Severity.WARNING]
            assert noisy == [], (name, render_text(noisy))


def test_criterion_2_singleton_detection_in_buggy_listing():
    with criterion(2, "the buggy summing listing reports singletons for "
                      "exactly {T, Rest} and nothing underscore-prefixed"):
        diags = [d for d in lint_text(SUM_LIST_BUGGY) if d.rule_id == "I04"]
        warnings = [d for d in diags if d.severity is Severity.WARNING]
        names = {d.message.split()[2].rstrip(":") for d in warnings}
        assert names == {"T", "Rest"}
        assert not any("_A" in d.message or "_R" in d.message for d in diags)


I01_CASE = """\
terminal_cut(X) :-
    check(X).
terminal_cut(X) :-
    act(X),
    !.
"""

I02_CASE = """\
watch :-
    repeat,
    read_event(E),
    handle(E).
"""

I03_CASE = """\
graft(X, L, R) :-
    append([X], L, R),
    use(X, L, R).
"""

I03_CONTROL = """\
graft(X, Y, L, R) :-
    append([X, Y], L, R),
    use(X, Y, L, R).
"""


def test_criterion_3_almost_always_wrong_triple():
    with criterion(3, "the three 'almost always wrong' constructs trip "
                      "exactly I01, I02, I03; their controls trip none"):
        assert idset(lint_text(I01_CASE), "I") == {"I01"}
        assert idset(lint_text(I02_CASE), "I") == {"I02"}
        assert idset(lint_text(I03_CASE), "I") == {"I03"}
        assert idset(lint_text(COUNT_UP), "I") == set()
        assert idset(lint_text(PROCESS_QUERIES), "I") == set()
        assert idset(lint_text(I03_CONTROL), "I") == set()


def test_criterion_4_mode_and_determinism_grammar():
    with criterion(4, "mode specifiers parse per system and are rejected "
                      "elsewhere; determinism words parse; doc heads "
                      "round-trip"):
        for system, vocabulary in MODE_SYSTEMS.items():
            for symbol in vocabulary:
                head = parse_doc_head(f"%% f({symbol}X)", system=system)
                assert head.args[0].mode == symbol
            foreign = set().union(*MODE_SYSTEMS.values()) - vocabulary
            for symbol in foreign:
                with pytest.raises(DocHeadError):
                    parse_doc_head(f"%% f({symbol}X)", system=system)
        for word in DETERMINISM_SPECIFIERS:
            assert parse_doc_head(f"%% g(+X) is {word}").determinism == word

        head = parse_doc_head("%% compare(?R:order, =T1:term, =T2:term)")
        assert [a.mode for a in head.args] == ["?", "=", "="]
        assert [a.type_name for a in head.args] == ["order", "term", "term"]

        rng = random.Random(404)
        for system in MODE_SYSTEMS:
            for _ in range(100):
                original = gen_doc_head(rng, system)
                reparsed = parse_doc_head(print_doc_head(original),
                                          system=system)
                assert reparsed.predicate_name == original.predicate_name
                assert reparsed.determinism == original.determinism
                assert reparsed.marker == original.marker
                assert [(a.mode, a.name, a.type_name)
                        for a in reparsed.args] \
                    == [(a.mode, a.name, a.type_name)
                        for a in original.args]


def test_criterion_5_formatter_idempotence_and_preservation():
    with criterion(5, "formatting a 30+ file corpus is idempotent, "
                      "structure- and comment-preserving, and lints clean "
                      "of layout rules"):
        corpus = formatter_corpus()
        assert len(corpus) >= 30
        for name, text in corpus.items():
            src = source_from_text(text, name)
            program = program_from_source(src)
            assert not program.syntax_diagnostics, name
            once = format_program(program)

            again = program_from_source(source_from_text(once, name))
            assert format_program(again) == once, name

            assert len(program.items) == len(again.items), name
            for before, after in zip(program.items, again.items):
                if before.head is not None:
                    assert structurally_equal(before.head, after.head), name
                if before.body is not None:
                    assert structurally_equal(before.body, after.body), name

            def comment_multiset(content):
                tokens, _ = scan(source_from_text(content))
                counts = {}
                for token in tokens:
                    if token.kind.value in ("line_comment", "block_comment"):
                        key = token.text.rstrip()
                        counts[key] = counts.get(key, 0) + 1
                return counts

            assert comment_multiset(text) == comment_multiset(once), name

            out_src = source_from_text(once, name)
            layout = [d for d in run(out_src,
                                     program_from_source(out_src), Config())
                      if d.rule_id.startswith("L")]
            assert layout == [], (name, layout)


def test_criterion_6_precedence_conformance():
    with criterion(6, "a,b;c parses as ;(,(a,b),c) and 200 fuzzed "
                      "expressions match the shunting-yard oracle"):
        program = program_from_source(source_from_text("t :- a,b;c.\n"))
        assert term_to_tuple(program.items[0].body) \
            == (";", (",", "a", "b"), "c")

        table = expression_table()
        rng = random.Random(8128)
        for _ in range(200):
            tree, text, _ = gen_expression(rng, depth=4)
            tokens, lex_diags = scan(source_from_text(text + " ."))
            assert not lex_diags, text
            assert term_to_tuple(read_term(tokens, table)) == tree, text
            assert shunting_yard(tokens, table) == tree, text


BUSY_FILE = """\
p :- isWellFormed, deed.
p :- a,b, strngth, !.

q(Unused) :-
    r(3.25),
    s(3.25),
    append([E], Rest0, Rest2),
    use(E, Rest0, Rest2).
"""


def test_criterion_7_config_and_exit_code_contract(tmp_path, capsys):
    with criterion(7, "disabling any rule removes exactly its diagnostics; "
                      "--fail-on flips exit codes; JSON and text carry the "
                      "same diagnostics"):
        baseline = lint_text(BUSY_FILE)
        present = {d.rule_id for d in baseline} - {"E01", "E02", "E99"}
        assert len(present) >= 6, present
        for rule_id in sorted(present):
            cfg = Config()
            cfg.rule_enabled[rule_id] = False
            reduced = lint_text(BUSY_FILE, cfg)
            assert {d.rule_id for d in baseline} - {d.rule_id for d in reduced} \
                == {rule_id}
            assert [(d.rule_id, d.span, d.message) for d in reduced] \
                == [(d.rule_id, d.span, d.message) for d in baseline
                    if d.rule_id != rule_id]

        # --fail-on flips the exit code around each severity boundary.
        hint_only = tmp_path / "hint_only.pl"
        hint_only.write_text(
            "same_length([], []).\n"
            "same_length([_|L1], [_|L2]) :-\n    same_length(L1, L2).\n",
            encoding="utf-8")
        assert main(["check", str(hint_only)]) == 0
        capsys.readouterr()
        assert main(["check", "--fail-on", "hint", str(hint_only)]) == 1
        capsys.readouterr()

        warny = tmp_path / "warny.pl"
        warny.write_text(BUSY_FILE, encoding="utf-8")
        assert main(["check", str(warny)]) == 1
        capsys.readouterr()
        assert main(["check", "--fail-on", "error", str(warny)]) == 0
        capsys.readouterr()

        # JSON and text renderings carry identical diagnostic sets.
        diags = lint_text(BUSY_FILE, path="busy.pl")
        document = json.loads(render_json(diags))
        from_json = {(e["path"], e["line"], e["col"], e["rule"],
                      e["severity"], e["message"])
                     for e in document["diagnostics"]}
        from_text = set()
        for line in render_text(diags).splitlines():
            location, rest = line.split(": ", 1)
            path, lineno, col = location.rsplit(":", 2)
            severity, bracketed, message = rest.split(" ", 2)
            from_text.add((path, int(lineno), int(col),
                           bracketed.strip("[]"), severity, message))
        assert from_json == from_text
        assert len(from_json) == len(diags)
