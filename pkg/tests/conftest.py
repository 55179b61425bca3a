import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from digitmap import DigitMap, check_premises, compute_atlas  # noqa: E402

HAPPY_TABLE = (0, 1, 4, 9, 16, 25, 36, 49, 64, 81)


@pytest.fixture(scope="session")
def happy():
    return DigitMap.power(2, 10)


@pytest.fixture(scope="session")
def happy_atlas(happy):
    return compute_atlas(happy)


def random_premise_map(rng: random.Random, base: int | None = None) -> DigitMap:
    """A random map with f(0) = 0, f(1) = 1 that passes the premise check."""
    while True:
        b = base or rng.randint(3, 10)
        table = [0, 1] + [rng.randint(0, 3 * b) for _ in range(b - 2)]
        fmap = DigitMap(b, tuple(table))
        if check_premises(fmap).ok:
            return fmap


@pytest.fixture(scope="session")
def random_maps():
    rng = random.Random(20240601)
    return [random_premise_map(rng) for _ in range(5)]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
