import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from psifrac import reduce  # noqa: E402

_VERDICTS: list[str] = []


@pytest.fixture(autouse=True)
def _single_worker():
    # tests that need several workers set them explicitly
    reduce.set_jobs(1)
    yield
    reduce.set_jobs(None)


@pytest.fixture
def verdict():
    """Record and print one ``PASS``/``FAIL`` line for an acceptance criterion, then assert it."""

    def record(name: str, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {detail}"
        _VERDICTS.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
