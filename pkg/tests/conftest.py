import math
import random
from fractions import Fraction
from math import comb

import pytest

from smax import Graph, Partition


def exact_log_tail(F, n, M, p):
    """ln P(X >= p) by direct big-integer summation of the hypergeometric pmf."""
    num = sum(comb(M, j) * comb(F - M, n - j) for j in range(p, min(M, n) + 1))
    den = comb(F, n)
    if num == den:
        return 0.0
    if 2 * num > den:
        return math.log1p(-float(Fraction(den - num, den)))
    return math.log(num) - math.log(den)


def exact_surprise(F, n, M, p):
    return -exact_log_tail(F, n, M, p) / math.log(10)


def restricted_growth(k):
    """Every set partition of range(k) as a restricted-growth label list."""
    if k == 0:
        yield []
        return

    def rec(prefix, top):
        if len(prefix) == k:
            yield list(prefix)
            return
        for c in range(top + 2):
            prefix.append(c)
            yield from rec(prefix, max(top, c))
            prefix.pop()

    yield from rec([0], 0)


def random_graph(rng, k, density=None):
    density = rng.random() if density is None else density
    edges = [(u, v) for u in range(k) for v in range(u + 1, k) if rng.random() < density]
    return Graph(k, edges)


def random_partition(rng, k, max_communities=None):
    c = max_communities or rng.randint(1, k)
    return Partition(rng.randrange(c) for _ in range(k))


@pytest.fixture
def bridged_triangles():
    """Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3."""
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


@pytest.fixture
def natural_split():
    return Partition([0, 0, 0, 1, 1, 1])


@pytest.fixture
def rng():
    return random.Random(20121105)


# one (criterion, passed, detail) entry per acceptance check, printed at the end of the run
ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
