import pytest

_ACCEPTANCE = pytest.StashKey[dict]()


class AcceptanceRecorder:
    """Collects one pass/fail verdict per numbered acceptance criterion."""

    def __init__(self, store):
        self._store = store

    def record(self, number, title, passed, detail=""):
        self._store[number] = (title, bool(passed), detail)
        return passed


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


@pytest.fixture
def acceptance(request):
    return AcceptanceRecorder(request.config.stash[_ACCEPTANCE])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        title, passed, detail = store[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict} - {title}" + (f" [{detail}]" if detail else ""))
