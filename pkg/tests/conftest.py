import numpy as np
import pytest

from statfuse import window_stats


@pytest.fixture(params=window_stats.available_backends())
def backend(request):
    """Run a test once per available box-sum kernel."""
    previous = window_stats.BACKEND
    window_stats.use_backend(request.param)
    yield request.param
    window_stats.use_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    ok = _ACCEPTANCE.get(crit, True)
    _ACCEPTANCE[crit] = ok and report.passed


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion", (marker.args[0], marker.args[1])))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
