import pytest

from covkit.arrays import Array
from covkit.search import TABLE1, TABLE2

_CRITERIA: dict[str, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark and (rep.when == "call" or rep.failed):
        _CRITERIA.setdefault(mark.args[0], []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s.split()[0])):
        ok = all(_CRITERIA[label])
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")


@pytest.fixture
def table1():
    return Array.from_rows(TABLE1, 4)


@pytest.fixture
def table2():
    return Array.from_rows(TABLE2, 5)
