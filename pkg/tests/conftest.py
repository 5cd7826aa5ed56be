import numpy as np
import pytest
from hypothesis import strategies as st

from prodlearn.dist import DiscreteDistribution, ProductDistribution


def random_dist(rng, max_size=4, grid=None, low=0.0, high=1.0):
    """Random distribution with support drawn from a grid on [low, high]."""
    grid = np.linspace(low, high, 21) if grid is None else np.asarray(grid)
    k = int(rng.integers(1, max_size + 1))
    support = np.sort(rng.choice(grid, size=min(k, grid.size), replace=False))
    return DiscreteDistribution(support, rng.dirichlet(np.ones(support.size)))


def random_product(rng, n=None, max_n=4, max_size=4, **kw):
    n = int(rng.integers(1, max_n + 1)) if n is None else n
    return ProductDistribution(tuple(random_dist(rng, max_size, **kw) for _ in range(n)))


def random_dominated(rng, d: DiscreteDistribution) -> DiscreteDistribution:
    """A distribution dominated by ``d``: move random mass downward."""
    probs = d.probs.copy()
    for j in range(d.size - 1, 0, -1):
        move = probs[j] * rng.uniform()
        target = int(rng.integers(0, j))
        probs[j] -= move
        probs[target] += move
    return DiscreteDistribution(d.support, probs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def distributions(draw, max_size=5, nonneg=True):
    size = draw(st.integers(1, max_size))
    grid = draw(st.lists(st.integers(0 if nonneg else -20, 20), min_size=size, max_size=size, unique=True))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=size, max_size=size))
    support = np.array(sorted(grid), dtype=float) / 20
    w = np.array(weights)
    return DiscreteDistribution(support, w / w.sum())


@st.composite
def products(draw, max_n=3, max_size=4):
    n = draw(st.integers(1, max_n))
    return ProductDistribution(tuple(draw(distributions(max_size)) for _ in range(n)))


def dyadic_dist(rng, max_size=6):
    """Values in multiples of 1/8 and probabilities in multiples of 1/64: float arithmetic stays exact."""
    k = int(rng.integers(1, max_size + 1))
    support = np.sort(rng.choice(np.arange(0, 17) / 8, size=k, replace=False))
    cuts = np.sort(rng.choice(np.arange(1, 64), size=k - 1, replace=False))
    counts = np.diff(np.concatenate([[0], cuts, [64]]))
    return DiscreteDistribution(support, counts / 64)


ACCEPTANCE_LINES = []


def report(criterion: int, title: str, passed: bool, detail: str = ""):
    """Record and print one acceptance line."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
