"""Shared fixtures: acceptance-criterion recording and a terminal summary."""

import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request, capsys):
    """``record(number, passed, detail)`` prints and stores one pass/fail line."""
    results = request.config.stash[_RESULTS]

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        results.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, [])
    if results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
