from __future__ import annotations

from functools import lru_cache

import pytest

from tuffley.nni import build_nni_graph
from tuffley.poset import augment, build_tuffley


@lru_cache(maxsize=None)
def tuffley(n: int):
    return build_tuffley(n)


@lru_cache(maxsize=None)
def bounded(n: int):
    return augment(tuffley(n))


@lru_cache(maxsize=None)
def nni_graph(n: int):
    return build_nni_graph(bounded(n))


@pytest.fixture(scope="session")
def S():
    return tuffley


@pytest.fixture(scope="session")
def P():
    return bounded


@pytest.fixture(scope="session")
def G():
    return nni_graph


# Acceptance criteria report one line each at the end of the run.
_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when == "teardown":
        return
    if call.when == "setup" and call.excinfo is None:
        return
    number, text = marker.args
    if call.excinfo is None:
        outcome = "PASS"
    elif call.excinfo.errisinstance(pytest.xfail.Exception) or item.get_closest_marker("xfail"):
        outcome = "XFAIL"
    else:
        outcome = "FAIL"
    _ACCEPTANCE[number] = (outcome, text)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        outcome, text = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {outcome}  {text}")
