import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def calibration():
    return json.loads((FIXTURES / "calibration.json").read_text())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
