import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(number, description): acceptance criterion bookkeeping",
    )


def pytest_runtest_makereport(item, call):
    if call.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    desc = marker.args[1] if len(marker.args) > 1 else item.name
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _CRITERIA[number] = (desc, outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        desc, outcome = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {outcome}  {desc}")
