import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[str, tuple[str, str]] = {}
_DETAIL = pytest.StashKey[str]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.fixture
def measured(request):
    """Attach a one-line measurement to the current acceptance test."""

    def note(text: str) -> None:
        request.node.stash[_DETAIL] = text

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    status = "PASS" if report.passed else "FAIL"
    _CRITERIA[marker.args[0]] = (status, item.stash.get(_DETAIL, "no measurement recorded"))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: (int(s.split()[0]), s)):
        status, detail = _CRITERIA[label]
        terminalreporter.write_line(f"criterion {label}: {status} | {detail}")
