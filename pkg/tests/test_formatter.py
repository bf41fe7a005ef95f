from __future__ import annotations

import random

import pytest

from prolint import (
    Config,
    FormatError,
    FormatStyle,
    check_format,
    format_program,
    program_from_source,
    run,
    source_from_text,
    structurally_equal,
)
from prolint.source_model import TokenKind, scan

from gen import gen_file
from snippets import ALL_SNIPPETS, PROCESS_QUERIES, SAME_LENGTH


def fmt(text: str, style: FormatStyle | None = None) -> str:
    program = program_from_source(source_from_text(text))
    return format_program(program, style)


def comment_texts(text: str):
    tokens, _ = scan(source_from_text(text))
    out = {}
    for token in tokens:
        if token.kind in (TokenKind.LINE_COMMENT, TokenKind.BLOCK_COMMENT):
            key = token.text.rstrip()
            out[key] = out.get(key, 0) + 1
    return out


def formatter_corpus() -> dict[str, str]:
    corpus = {}
    for name, text in ALL_SNIPPETS.items():
        corpus[name] = "/* fixture: " + name + " */\n\n" + text
    rng = random.Random(1729)
    for index in range(26):
        corpus[f"gen_{index:02d}.pl"] = gen_file(rng)
    return corpus


def test_same_length_formats_to_canonical_rendering():
    squashed = ("same_length([],[]). "
                "same_length([_|L1],[_|L2]):-same_length(L1,L2).\n")
    assert fmt(squashed) == SAME_LENGTH


def test_compact_disjunction_block():
    assert fmt("p :- ( a ; b ).\n") == (
        "p :-\n"
        "    (   a\n"
        "    ;   b\n"
        "    ).\n")


def test_if_then_else_block():
    assert fmt("p :- (t1 -> x ; t2 -> y ; z).\n") == (
        "p :-\n"
        "    (   t1 ->\n"
        "        x\n"
        "    ;   t2 ->\n"
        "        y\n"
        "    ;   z\n"
        "    ).\n")


def test_repeat_region_gets_extra_level():
    out = fmt("p :- repeat, read(X), handle(X), X = done, !, wrap_up.\n")
    assert out == (
        "p :-\n"
        "    repeat,\n"
        "        read(X),\n"
        "        handle(X),\n"
        "        X = done,\n"
        "    !,\n"
        "    wrap_up.\n")


def test_canonical_input_is_fixed_point():
    assert fmt(SAME_LENGTH) == SAME_LENGTH


def test_formatter_splits_allowlisted_sequences():
    out = fmt(PROCESS_QUERIES)
    assert "    write('All done.'),\n    nl.\n" in out


def test_one_blank_line_between_predicates_none_within():
    out = fmt("a(1).\n\n\n\na(2).\nb.\n")
    assert out == "a(1).\na(2).\n\nb.\n"


def test_conjunction_kept_parenthesized_under_disjunction():
    out = fmt("p :- ((a, b) ; c).\n")
    assert out == (
        "p :-\n"
        "    (   (   a,\n"
        "            b\n"
        "        )\n"
        "    ;   c\n"
        "    ).\n")


def test_redundant_parens_on_simple_terms_dropped():
    assert fmt("p :- q((a)).\n") == "p :-\n    q(a).\n"


def test_required_parens_emitted():
    out = fmt("p :- q((a, b)).\n")
    assert "q((a, b))" in out


def test_lexemes_preserved_verbatim():
    text = 'p(0x1F, 0\'a, "str\\n", \'q w\', 2.50).\n'
    out = fmt(text)
    for lexeme in ("0x1F", "0'a", '"str\\n"', "'q w'", "2.50"):
        assert lexeme in out


def test_operator_spacing_matches_house_style():
    out = fmt("p(X,Y) :- X is 1+2*3, q(X-Y).\n")
    assert "X is 1 + 2 * 3" in out
    assert "q(X - Y)" in out


def test_indicators_and_qualifiers_print_tight():
    out = fmt(":- module(m, [foo/1, bar/2]).\nfoo(X) :- lists:append(X).\n")
    assert "[foo/1, bar/2]" in out
    assert "lists:append(X)" in out


def test_long_head_breaks_after_open_paren():
    head_args = ", ".join(f"Argument_{i}" for i in range(8))
    out = fmt(f"quite_a_long_predicate_name({head_args}) :- body_goal.\n")
    lines = out.splitlines()
    assert lines[0] == "quite_a_long_predicate_name("
    assert lines[1].startswith("    Argument_0")
    assert any(line == ") :-" for line in lines)
    assert all(len(line) <= 79 for line in lines)


def test_long_goal_breaks_after_argument_commas():
    args = ", ".join(f"long_argument_{i}" for i in range(8))
    out = fmt(f"p :- some_goal({args}).\n")
    lines = out.splitlines()
    assert all(len(line) <= 79 for line in lines)
    assert lines[1].startswith("    some_goal(")
    assert lines[1].endswith(",")
    assert lines[2].startswith("        ")


def test_trailing_comment_kept_when_short():
    out = fmt("p :- q.  % keep me\n")
    assert out == "p :-\n    q. % keep me\n"


def test_long_trailing_comment_moves_above():
    comment = "% " + "w" * 60
    out = fmt(f"p :- q.  {comment}\n")
    assert out == f"p :-\n    {comment}\n    q.\n"


def test_preceding_comment_stays_above_clause():
    out = fmt("% about p\np :- q.\n")
    assert out.startswith("% about p\np :-\n")


def test_interior_comment_kept_between_goals():
    out = fmt("p :- q,\n   % between\n   r.\n")
    assert out == "p :-\n    q,\n    % between\n    r.\n"


def test_comment_only_gap_collapsed_to_two_blanks():
    out = fmt("/* header */\n\n\n\n\np.\n")
    assert out == "/* header */\n\n\np.\n"


def test_format_refused_on_syntax_error():
    program = program_from_source(source_from_text("broken(((.\n"))
    with pytest.raises(FormatError) as excinfo:
        format_program(program)
    assert excinfo.value.diagnostic.rule_id in ("E01", "E02")


def test_check_format_canonical():
    src = source_from_text(SAME_LENGTH)
    program = program_from_source(src)
    canonical, divergence = check_format(src, program)
    assert canonical is True
    assert divergence is None


def test_check_format_reports_divergence_at_tab():
    text = SAME_LENGTH.replace("    same_length", "\tsame_length")
    src = source_from_text(text)
    program = program_from_source(src)
    canonical, divergence = check_format(src, program)
    assert canonical is False
    assert (divergence.start_line, divergence.start_col) == (3, 1)


def test_check_format_trailing_newline_matters():
    text = SAME_LENGTH + "\n"
    src = source_from_text(text)
    program = program_from_source(src)
    canonical, _ = check_format(src, program)
    assert canonical is False


def test_directive_with_conjunction_splits_goals():
    out = fmt(":- use_module(a), use_module(b).\n")
    assert out == ":- use_module(a),\n    use_module(b).\n"


def test_operator_directives_respected_in_order():
    text = (":- op(700, xfx, ===).\n"
            "\n"
            "eq(A, B) :- A === B.\n")
    out = fmt(text)
    assert "A === B" in out
    assert fmt(out) == out


def test_compound_printed_before_its_op_directive_stays_canonical():
    text = ("p('==='(a, b)).\n"
            "\n"
            ":- op(700, xfx, ===).\n"
            "\n"
            "q(X) :- X === 1.\n")
    out = fmt(text)
    # the eager clause cannot use operator notation yet
    assert "'==='(a, b)" in out.splitlines()[0] or "===(a, b)" in out.splitlines()[0]
    assert "X === 1" in out
    assert fmt(out) == out


def _assert_formatting_contract(name: str, text: str) -> None:
    src = source_from_text(text, name)
    program = program_from_source(src)
    assert not program.syntax_diagnostics, (name, program.syntax_diagnostics)
    once = format_program(program)

    # idempotence, byte-exact
    again_program = program_from_source(source_from_text(once, name))
    assert not again_program.syntax_diagnostics, (name, once)
    twice = format_program(again_program)
    assert twice == once, name

    # semantics preserved
    original_items = program.items
    reread_items = again_program.items
    assert len(original_items) == len(reread_items), name
    for before, after in zip(original_items, reread_items):
        assert before.kind == after.kind, name
        if before.head is not None:
            assert structurally_equal(before.head, after.head), name
        if before.body is not None:
            assert structurally_equal(before.body, after.body), name

    # comment conservation
    assert comment_texts(text) == comment_texts(once), name

    # constructive witness: the output satisfies every layout rule
    out_src = source_from_text(once, name)
    out_program = program_from_source(out_src)
    layout = [d for d in run(out_src, out_program, Config())
              if d.rule_id.startswith("L")]
    assert layout == [], (name, once, layout)


def test_formatting_contract_over_corpus():
    corpus = formatter_corpus()
    assert len(corpus) >= 30
    for name, text in corpus.items():
        _assert_formatting_contract(name, text)


def test_suppression_comment_reattaches_to_head_line():
    out = fmt("p :- q, !.  % prolint: allow I01\n")
    assert out.splitlines()[0] == "p :- % prolint: allow I01"
    # still effective after the rewrite
    src = source_from_text(out, "x.pl")
    diags = run(src, program_from_source(src), Config())
    assert not [d for d in diags if d.rule_id == "I01"]
