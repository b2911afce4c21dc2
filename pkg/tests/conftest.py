import sys
from pathlib import Path

import numpy as np
import pytest

from lapcem.formats import from_adjacency_text

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).parent))

# conjectures each reference graph is known to violate
REFERENCE_SETS = {
    "graph2": {2, 3, 15, 28, 29, 31, 32, 36, 43, 49, 52, 53, 54, 55, 57, 58, 59, 60, 61, 62, 63, 64, 67},
    "graph66": {3, 15, 28, 29, 31, 32, 36, 43, 49, 52, 53, 54, 55, 57, 58, 59, 60, 61, 62, 63, 64, 66},
    "graph41": {41, 43, 49, 51, 52, 53, 54, 55, 57, 58},
    "graph65": {65, 68},
}
REFERENCE_SIZES = {"graph2": 12, "graph66": 20, "graph41": 20, "graph65": 21}

ACCEPTANCE_LINES = []


def load_fixture(name):
    return from_adjacency_text((DATA / f"{name}.txt").read_text())


@pytest.fixture(scope="session")
def reference_graphs():
    return {name: load_fixture(name) for name in REFERENCE_SETS}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int(s.split()[1].split("/")[0].rstrip(":")), s)):
            terminalreporter.write_line(line)
