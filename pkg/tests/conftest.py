import os
from collections import OrderedDict

import pytest
from hypothesis import HealthCheck, settings

from pathsat.subject import load_subject

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA: "OrderedDict[str, list]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", (m.args[0], m.args[1])))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for name, value in report.user_properties:
        if name == "criterion":
            _CRITERIA.setdefault(value, []).append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), results in sorted(_CRITERIA.items()):
        failed = [nid for nid, outcome in results if outcome != "passed"]
        status = "FAIL" if failed else "PASS"
        terminalreporter.write_line(
            f"[{status}] {n}. {title} ({len(results) - len(failed)}/{len(results)} passed)")
        for nid in failed:
            terminalreporter.write_line(f"         failed: {nid.split('::', 1)[-1]}")


@pytest.fixture(scope="session")
def linear():
    return load_subject("linear")


@pytest.fixture(scope="session")
def bubble():
    return load_subject("bubble")


@pytest.fixture(scope="session")
def matrix():
    return load_subject("matrix")


@pytest.fixture(scope="session")
def merge():
    return load_subject("merge")
