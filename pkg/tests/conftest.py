import pytest

from cdc_tradeoff.core import ClusterConfig
from cdc_tradeoff.placement import place_files

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def flagship():
    return ClusterConfig(K=10, Q=10, N=2520, r=5, T=60)


@pytest.fixture(scope="session")
def flagship_placement(flagship):
    return place_files(flagship)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
