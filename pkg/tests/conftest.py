import pytest

from hyperlattice import generate_lattice


@pytest.fixture(scope="session")
def lattices():
    cache = {}

    def get(rings, p=7):
        if (p, rings) not in cache:
            cache[p, rings] = generate_lattice(p, rings)
        return cache[p, rings]
    return get


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = getattr(config, "_acceptance_verdicts", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for line in verdicts.values():
        terminalreporter.write_line(line)
