import functools
import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from slpfo.generators import random_apex  # noqa: E402
from slpfo.slp import decompress, load_slp  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")
POOL_SIZE = 300

_criteria_lines = []


def fixture_path(name):
    return os.path.join(FIXTURES, name)


@pytest.fixture
def example6():
    return load_slp(fixture_path("example6.slp"))


def record(label, ok, detail=""):
    """Print one pass/fail line for an acceptance criterion and keep it for the summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
    print(line)
    _criteria_lines.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if _criteria_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criteria_lines:
            terminalreporter.write_line(line)


class Instance:
    __slots__ = ("seed", "slp", "dec")

    def __init__(self, seed):
        self.seed = seed
        self.slp = random_apex(seed, nonterminals=2 + seed % 29)
        self.dec = decompress(self.slp)


@functools.lru_cache(maxsize=None)
def pool():
    """Random apex SLPs (at most 30 nonterminals, degree at most 4)."""
    return [Instance(seed) for seed in range(POOL_SIZE)]


def rng_for(seed, salt):
    return random.Random(seed * 1_000_003 + salt)


@pytest.fixture
def example6_structure(example6):
    return decompress(example6).structure
