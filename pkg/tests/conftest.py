import pytest
from hypothesis import settings

from netreinforce.graph import load_network
from netreinforce.partition import Partition

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# node ids in the bundled five-node example
A, B, C, D, E = range(5)


@pytest.fixture(scope="session")
def small5():
    return load_network("example:small5")


@pytest.fixture(scope="session")
def small5_split():
    """Regions {a, b, c} and {d, e}."""
    return Partition(((A, B, C), (D, E)))


@pytest.fixture(scope="session")
def net33():
    return load_network("example:net33")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS.values():
            terminalreporter.write_line(line)
