import os
import sys

import pytest

# the brute-force oracle lives next to the tests and is imported as a plain module
sys.path.insert(0, os.path.dirname(__file__))


def pytest_collection_modifyitems(config, items):
    if os.environ.get("QATOPO_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="long-running; set QATOPO_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import summary_lines

    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
