import numpy as np
import pytest

from moduli_walls import BranchDivisor, expansion_data, find_wall

# seeds whose Im e2 line crosses the wall between the two stable cells
WALL_SEEDS = [
    (2.996 + 1.912j, 1.337 + 0.68j),
    (2.306 + 1.491j, 1.009 + 0.646j),
    (2.6 + 1.7j, 1.2 + 0.6j),
    (3.3 + 2.1j, 1.5 + 0.7j),
    (2.804 + 1.676j, 0.918 + 1.065j),
]

ACCEPTANCE = {}


def random_divisors(n, seed=2026, min_gap=0.15):
    """Valid divisors with all six branch points at least ``min_gap`` apart."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        v = rng.uniform([-3.0, 0.1, -3.0, 0.1], [3.0, 3.0, 3.0, 3.0])
        E = BranchDivisor.from_vector(v)
        r = E.roots
        gap = min(abs(r[i] - r[j]) for i in range(6) for j in range(i + 1, 6))
        if gap >= min_gap:
            out.append(E)
    return out


@pytest.fixture(scope="session")
def walls():
    return [find_wall(BranchDivisor(*s)) for s in WALL_SEEDS]


@pytest.fixture(scope="session")
def wall(walls):
    return walls[0]


@pytest.fixture(scope="session")
def expansion(wall):
    return expansion_data(wall)


@pytest.fixture(scope="session")
def minus_divisor():
    return BranchDivisor(*WALL_SEEDS[0])


@pytest.fixture(scope="session")
def plus_divisor():
    return BranchDivisor(*WALL_SEEDS[1])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
