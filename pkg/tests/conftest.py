from pathlib import Path

import pytest

from ptss.derive import derive_pts
from ptss.lang import load_spec

SPECS = Path(__file__).resolve().parent.parent / "specs"
NAMED = ("t1", "t2", "t3", "t4", "t5", "t6")
ACCEPTANCE_LINES: list = []


def spec_path(name: str) -> str:
    return str(SPECS / f"{name}.ptss")


@pytest.fixture(scope="session")
def base():
    return load_spec(spec_path("base_pa"))


@pytest.fixture(scope="session")
def base_pts(base):
    """The fragment reachable from the six named terms of the base algebra."""
    return derive_pts(base, list(NAMED))


@pytest.fixture(scope="session")
def named(base):
    return {n: base.term(n) for n in NAMED}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for text in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(text)
