import sys
from pathlib import Path

import pytest

from biharm.jets import backend

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(params=backend.available())
def kernel_backend(request):
    """Run a test once per available kernel back end."""
    prev = backend.use(request.param)
    yield request.param
    backend.use(prev)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
