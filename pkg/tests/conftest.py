from pathlib import Path

import pytest

from rabc import analyze_program, parse_program

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus" / "benchmarks.rabc"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def corpus_source() -> str:
    return CORPUS.read_text()


@pytest.fixture(scope="session")
def corpus(corpus_source):
    return parse_program(corpus_source)


@pytest.fixture(scope="session")
def analysis(corpus):
    return analyze_program(corpus)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
