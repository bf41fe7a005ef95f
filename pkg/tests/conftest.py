from __future__ import annotations

import pytest

from prolint import Config, program_from_source, run, source_from_text


def lint_text(text: str, cfg: Config | None = None, path: str = "test.pl"):
    src = source_from_text(text, path)
    program = program_from_source(src)
    return run(src, program, cfg or Config())


def rule_ids(diags) -> list[str]:
    return [d.rule_id for d in diags]


@pytest.fixture
def lint():
    return lint_text
