from __future__ import annotations

import json

import pytest

from solenoidkit.cli import run


def cli(*argv: str, expect: int = 0) -> dict:
    status, text = run(list(argv))
    assert status == expect, text
    return json.loads(text) if text.strip().startswith("{") else {"text": text}


@pytest.fixture
def run_cli():
    return cli


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
