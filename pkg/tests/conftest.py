"""Shared fixtures and the per-criterion acceptance summary."""

import pytest

_KEY = "acceptance_results"


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criterion")
    setattr(config, _KEY, {})


@pytest.fixture
def acceptance_log(request):
    """Record ``(number, title, ok, detail)`` for the terminal summary."""
    results = getattr(request.config, _KEY)

    def log(number, title, ok, detail):
        results[number] = (title, bool(ok), detail)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, _KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} :: {detail}")
