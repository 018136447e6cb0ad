import pytest

from catqueue import EconParams, ModelParams
from catqueue.crosscheck import random_grid

SCEN_A = ModelParams(lam=7.0, mu=4.0, xi=0.4, eta=2.0)
SCEN_B = ModelParams(lam=7.0, mu=2.0, xi=0.7, eta=1.0)
SCEN_C = ModelParams(lam=7.0, mu=4.0, xi=0.3, eta=2.0)


@pytest.fixture
def scen_a():
    return SCEN_A, EconParams(r_s=7.0, r_f=0.0, c=3.0)


@pytest.fixture
def scen_b():
    return SCEN_B, EconParams(r_s=7.0, r_f=0.0, c=3.0)


@pytest.fixture(scope="session")
def grid():
    return random_grid(200, seed=12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s[7:]):
            terminalreporter.write_line(line)
