import numpy as np
import pytest

_ACCEPTANCE = {}
_OUTCOMES = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def criterion(request):
    """Register an acceptance criterion; its outcome is printed in the summary."""

    def register(name, detail=""):
        _ACCEPTANCE[request.node.nodeid] = (name, detail)

    return register


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or rep.outcome != "passed":
        _OUTCOMES.setdefault(item.nodeid, rep.outcome)
        if rep.outcome != "passed":
            _OUTCOMES[item.nodeid] = rep.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (name, detail) in _ACCEPTANCE.items():
        status = "PASS" if _OUTCOMES.get(nodeid) == "passed" else "FAIL"
        line = f"{status}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
