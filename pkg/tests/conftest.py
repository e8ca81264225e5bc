import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "laws",
    max_examples=500,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "laws"))

_CRITERIA: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    _, status, duration = _CRITERIA.get(number, (title, "PASS", 0.0))
    if not rep.passed:
        status = "FAIL"
    _CRITERIA[number] = (title, status, duration + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, duration = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}  ({duration:.2f}s)")
