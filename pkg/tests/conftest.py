import pytest

from birthchain import config


@pytest.fixture
def exact_limit(monkeypatch):
    """Set the exact-arithmetic ceiling for one test."""

    def _set(value):
        monkeypatch.setenv(config.EXACT_LIMIT_ENV, str(value))

    return _set


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome for the terminal summary."""

    def _record(number, title, passed, detail=""):
        _CRITERIA.append((number, title, passed, detail))
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_CRITERIA):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}" + (f" ({detail})" if detail else ""))
