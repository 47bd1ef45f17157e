import sys

import pytest

from cbfsim.smoke import LINE, line_network


@pytest.fixture
def line5():
    return lambda releases=None, **kw: line_network(LINE, releases, **kw)



def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
