import itertools
import math

import numpy as np
import pytest

from kuramoto_hardness.graph import WeightedGraph


def ring(n: int) -> WeightedGraph:
    return WeightedGraph(n, tuple((min(i, (i + 1) % n), max(i, (i + 1) % n), 1.0) for i in range(n)))


def complete(n: int) -> WeightedGraph:
    return WeightedGraph(n, tuple((i, j, 1.0) for i, j in itertools.combinations(range(n), 2)))


def twist(n: int, q: int = 1) -> np.ndarray:
    return np.array([2 * math.pi * q * i / n for i in range(n)])


@pytest.fixture
def hexagon():
    return ring(6)


@pytest.fixture
def hex_twist():
    return twist(6)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
