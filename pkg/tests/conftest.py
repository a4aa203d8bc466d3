import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def criterion(request):
    """``criterion(ok, detail)`` records the outcome of the test's criterion for the summary."""
    n = request.node.get_closest_marker("criterion").args[0]

    def record(ok, detail=""):
        _CRITERIA[n] = (bool(ok), detail)

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m and rep.when == "call" and rep.failed and m.args[0] not in _CRITERIA:
        _CRITERIA[m.args[0]] = (False, f"error: {call.excinfo.typename}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in range(1, 11):
        if n in _CRITERIA:
            ok, detail = _CRITERIA[n]
            tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            tr.write_line(f"criterion {n:2d}: NOT RUN")
