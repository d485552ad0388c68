from fractions import Fraction as F

import pytest

from mlurn import standard_profiles
from mlurn.prefs import margin_matrix

EXAMPLE_NAMES = ("condorcet-winner", "condorcet-cycle", "cycle-with-loser")

# maximal lotteries of the three bundled examples
EXAMPLE_ML = {
    "condorcet-winner": (F(1), F(0), F(0)),
    "condorcet-cycle": (F(1, 3), F(1, 3), F(1, 3)),
    "cycle-with-loser": (F(1, 3), F(1, 6), F(1, 2), F(0)),
}


@pytest.fixture(scope="session")
def ex1():
    return standard_profiles.printed_margins("condorcet-winner")


@pytest.fixture(scope="session")
def ex2():
    return standard_profiles.printed_margins("condorcet-cycle")


@pytest.fixture(scope="session")
def ex3():
    return standard_profiles.printed_margins("cycle-with-loser")


@pytest.fixture(scope="session")
def examples():
    return dict(zip(EXAMPLE_NAMES, standard_profiles.example_margins()))


@pytest.fixture(scope="session")
def ex1_profile():
    return standard_profiles.load("condorcet-winner")


def table_margins(name):
    return margin_matrix(standard_profiles.load(name))


# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        numbered = [x for x in ACCEPTANCE_LINES if x.startswith("criterion ")]
        numbered.sort(key=lambda x: int(x.split()[1].rstrip(":")))
        for line in numbered + [x for x in ACCEPTANCE_LINES if x not in numbered]:
            terminalreporter.write_line(line)
