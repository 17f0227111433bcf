"""Shared fixtures and the per-criterion PASS/FAIL summary for the acceptance suite."""
from __future__ import annotations

import pytest

from orbitavg.scenarios import build

CRITERIA: dict[str, str] = {}
OUTCOMES: dict[str, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(code, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            CRITERIA[m.args[0]] = m.args[1]


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for code, title in CRITERIA.items():
        if f"criterion-{code}" in report.keywords:
            OUTCOMES.setdefault(code, []).append(report.passed)


@pytest.hookimpl(tryfirst=True)
def pytest_itemcollected(item):
    m = item.get_closest_marker("criterion")
    if m:
        item.keywords[f"criterion-{m.args[0]}"] = True


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for code in sorted(CRITERIA, key=lambda c: int(c[2:])):
        runs = OUTCOMES.get(code)
        if not runs:
            status = "NOT RUN"
        else:
            status = "PASS" if all(runs) else "FAIL"
        terminalreporter.write_line(f"{code} {status}  {CRITERIA[code]}")


@pytest.fixture(scope="session")
def rotation():
    return build("rotation")


@pytest.fixture(scope="session")
def rational7():
    return build("rational_rotation", alpha="1/7")


@pytest.fixture(scope="session")
def spiral():
    return build("spiral_two_circles")


@pytest.fixture(scope="session")
def identified():
    return build("spiral_identified")


@pytest.fixture(scope="session")
def cylinder():
    return build("varying_angle_cylinder")


@pytest.fixture(scope="session")
def cone():
    return build("triple_cone")


@pytest.fixture(scope="session")
def dyadic():
    return build("dyadic_product")
