import pytest

_RESULTS = {}


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the running acceptance test."""
    def note(text: str):
        request.node.user_properties.append(("detail", text))
        print(text)
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = marker.args
    notes = [v for k, v in item.user_properties if k == "detail"]
    _RESULTS[number] = (title, rep.passed, "; ".join(notes))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, notes = _RESULTS[number]
        line = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}"
        terminalreporter.write_line(line + (f" -- {notes}" if notes else ""))
