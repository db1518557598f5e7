import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("qroe", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qroe")

_CRITERIA = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[key] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k.split()[0])):
        verdict = "PASS" if _CRITERIA[key] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  criterion {key}")
