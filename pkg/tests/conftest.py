import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        marker = report.acceptance if hasattr(report, "acceptance") else None
        if marker is not None:
            _acceptance.append((marker[0], marker[1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        rep.acceptance = m.args


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    verdicts = {}
    for number, title, outcome in _acceptance:
        ok = verdicts.get(number, (title, True))[1] and outcome == "passed"
        verdicts[number] = (title, ok)
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        title, ok = verdicts[number]
        terminalreporter.write_line(f"AC{number:<3d} {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
