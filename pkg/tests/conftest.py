import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fdivkit", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fdivkit")

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.get_closest_marker("acceptance") is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.outcome == "passed" and not hasattr(rep, "wasxfail") else "FAIL"
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        cid, _, text = doc.partition(" ")
        _ACCEPTANCE.append(f"{cid} {status}  {text}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
