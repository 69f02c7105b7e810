import pytest

from onoma_relay import RicianLink, Topology

ACCEPTANCE_LINES = []


@pytest.fixture
def fig4_topology():
    return Topology.from_params(3, 3, 4, 6, 4, 6)


@pytest.fixture
def fig4_squared():
    return Topology.from_params(3, 3, 4, 6, 4, 6, squared=True)


@pytest.fixture
def fig9_topology():
    return Topology.from_params(3, 3, 4, 12, 4, 12)


@pytest.fixture
def link_k4():
    return RicianLink(4.0, 6.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
