import pytest
from hypothesis import settings

from dmbeam import AngularGrid, analytic_set, sample_pattern_set

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def pset():
    return analytic_set()


@pytest.fixture(scope="session")
def grid_set():
    return sample_pattern_set(AngularGrid(1.0, 1.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        item.rep_outcome = rep.outcome


@pytest.fixture
def criterion(request):
    """Collects a detail string; emits one PASS/FAIL line per acceptance test."""
    details = []
    yield details.append
    label = request.node.get_closest_marker("criterion")
    name = label.args[0] if label else request.node.name
    status = "PASS" if getattr(request.node, "rep_outcome", "failed") == "passed" else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] {name}" + (f"  ({'; '.join(details)})" if details else ""))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")
