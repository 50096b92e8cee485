import numpy as np
import pytest

from wlinkpred import WeightedGraph, load_edge_list


@pytest.fixture
def path_graph():
    return load_edge_list("a b 0.5\nb c 0.5\n")


@pytest.fixture
def triangle():
    return WeightedGraph.from_edges(["a", "b", "c"], [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def star4():
    # center 0, leaves 1..4
    return WeightedGraph.from_edges(["c", "l1", "l2", "l3", "l4"], [(0, i) for i in range(1, 5)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# -- acceptance summary ---------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        prev = _CRITERIA.get(num)
        if prev is None or prev[1] == "PASS":
            _CRITERIA[num] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, status = _CRITERIA[num]
        terminalreporter.write_line(f"[{status}] criterion {num}: {title}")
