import pytest

from sgdicp.harness import perturb
from sgdicp.synthetic import make_primitive

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def room_corner():
    return make_primitive("room-corner", 3000, seed=0)


@pytest.fixture(scope="session")
def small_pair(room_corner):
    """(source, reference, theta_true) with reference = theta_true(source)."""
    reference, theta = perturb(room_corner, 0.08, 0.08, seed=3)
    return room_corner, reference, theta


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
