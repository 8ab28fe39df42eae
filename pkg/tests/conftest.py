import numpy as np
import pytest

from pronlearn.candidate_space import CandidateSpace, build_candidate_space
from pronlearn.phoneme_core import ConfusionMatrix, default_confusion_matrix, default_inventory

# radius at which the shipped matrix reproduces the paine candidate table
PAINE_RADIUS = 0.2

PAINE_TABLE = [
    "b eh n", "b eh ng", "b ey n", "b ey ng", "b iy n", "b iy ng", "b ih n", "b ih ng",
    "p eh n", "p eh ng", "p ey n", "p ey ng", "p iy n", "p iy ng", "p ih n", "p ih ng",
]

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cm():
    return default_confusion_matrix()


@pytest.fixture(scope="session")
def inventory():
    return default_inventory()


@pytest.fixture(scope="session")
def paine(cm):
    return build_candidate_space(("p", "ey", "n"), PAINE_RADIUS, 6, cm)


def random_matrix(seed, high=1.0, symbols=None, inventory=None):
    """Random asymmetric cost matrix; only ``symbols`` get nonzero off-diagonal costs."""
    inv = inventory or default_inventory()
    rng = np.random.default_rng(seed)
    cost = rng.uniform(0.0, high, (len(inv), len(inv)))
    if symbols is not None:
        keep = np.zeros(len(inv), dtype=bool)
        keep[[inv.id(s) for s in symbols]] = True
        cost[~(keep[:, None] & keep[None, :])] = high
    np.fill_diagonal(cost, 0.0)
    return ConfusionMatrix(cost, inv)


def random_space(rng, inventory, max_m=5, max_n=6, max_x=None):
    while True:
        m = int(rng.integers(1, max_m + 1))
        base = tuple(inventory.symbols[i] for i in rng.integers(0, 39, m))
        cands = []
        for p in base:
            n = int(rng.integers(1, max_n + 1))
            others = [s for s in inventory.symbols if s != p]
            picks = list(rng.choice(others, n - 1, replace=False))
            lst = picks[:]
            lst.insert(int(rng.integers(0, n)), p)
            cands.append(tuple(lst))
        space = CandidateSpace(base, 0.0, tuple(cands))
        if max_x is None or space.size <= max_x:
            return space
