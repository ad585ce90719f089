from __future__ import annotations

from pathlib import Path

import pytest

from phonon_herald.analysis import Scenario
from phonon_herald.params import reference_params

ROOT = Path(__file__).resolve().parents[1]
REFERENCE_CONFIG = ROOT / "configs" / "reference.ini"

# filled by tests/test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def params():
    return reference_params()


@pytest.fixture(scope="session")
def scenario(params):
    return Scenario(params)


@pytest.fixture(scope="session")
def reference_config_path():
    return REFERENCE_CONFIG


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
