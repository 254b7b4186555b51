import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(k, passed, detail)``."""
    def record(k, passed, detail):
        _CRITERIA.setdefault(k, []).append((bool(passed), detail))
        return passed
    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(k): test backs acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is not None and rep.when == "call" and rep.failed:
        # a failing assertion or error still produces a FAIL line
        msg = str(call.excinfo.value).splitlines()[0] if call.excinfo else "failed"
        _CRITERIA.setdefault(mark.args[0], []).append((False, f"{item.name}: {msg[:160]}"))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok = all(p for p, _ in _CRITERIA[k])
        details = "; ".join(d for _, d in _CRITERIA[k])
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {details}")
