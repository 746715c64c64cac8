import numpy as np
import pytest

from cyclomon import ExtensionInstance, LinearOperator, OperatorGraph


def make_g1():
    return OperatorGraph([[0.0], [1.0]], [[0.0], [1.0]])


def make_g2():
    return OperatorGraph([[0.0], [1.0]], [[1.0], [0.0]])


def make_g4():
    return OperatorGraph([[1, 0], [0, 1], [-1, 0]], [[0, 1], [-1, 0], [0, -1]])


@pytest.fixture
def g1():
    return make_g1()


@pytest.fixture
def g2():
    return make_g2()


@pytest.fixture
def g4():
    return make_g4()


@pytest.fixture
def single():
    return OperatorGraph([[0.3, -1.2]], [[2.0, 0.5]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def g1_instance(B, w, n=2):
    return ExtensionInstance(make_g1(), n, LinearOperator([[B]]), [w])



ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """State for one acceptance line; tests add a ``detail`` string."""
    state = {"label": request.node.get_closest_marker("criterion").args[0],
             "detail": "", "ok": False}
    ACCEPTANCE_LINES.append(state)
    return state


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    state = getattr(item, "funcargs", {}).get("criterion")
    if state is not None and report.when == "call":
        state["ok"] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for state in sorted(ACCEPTANCE_LINES, key=lambda s: s["label"]):
        verdict = "PASS" if state["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {state['label']:>2}: {verdict}  {state['detail']}")
