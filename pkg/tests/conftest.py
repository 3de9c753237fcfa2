import random
from fractions import Fraction

import pytest


@pytest.fixture
def rng():
    return random.Random(20240611)


def rand_q(rng, lo=-30, hi=30, den=9):
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
