import pytest

from eprnet import Link, LossParams, Node, PhysicalTopology

# Filled by the acceptance tests; echoed after the run so the verdict
# lines survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def two_node():
    return PhysicalTopology(
        name="two",
        nodes=(Node("s", 0.0, 0.0), Node("a", 1.0, 0.0)),
        links=(Link("s", "a", 1.0),),
    )


@pytest.fixture
def star3():
    # s in the middle, both spokes 1 km
    return PhysicalTopology(
        name="star3",
        nodes=(Node("s", 0.0, 0.0), Node("a", 1.0, 0.0), Node("b", -1.0, 0.0)),
        links=(Link("s", "a", 1.0), Link("s", "b", 1.0)),
    )


@pytest.fixture
def chain3():
    # s - a - b: everything behind node a shares one duplex fiber
    return PhysicalTopology(
        name="chain3",
        nodes=(Node("s", 0.0, 0.0), Node("a", 1.0, 0.0), Node("b", 2.0, 0.0)),
        links=(Link("s", "a", 1.0), Link("a", "b", 1.0)),
    )


@pytest.fixture
def default_loss():
    return LossParams(fiber_loss_db_per_km=0.4, wss_loss_db=8.0)
