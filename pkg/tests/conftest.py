import pytest

from ne2sim.core import Node, Position, RadioParams, build_topology


def make_topology(coords, radius=100.0, energy=1.0):
    nodes = [Node(i, Position(float(x), float(y)), energy) for i, (x, y) in enumerate(coords)]
    return build_topology(nodes, radius)


@pytest.fixture
def radio():
    return RadioParams()


@pytest.fixture
def topo_factory():
    return make_topology


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
