import math
import random
from collections import Counter

import pytest

from smax import DomainError
from smax.stats import (
    HIGHER_BETTER,
    LOWER_BETTER,
    kendall_tau,
    mean_sem,
    performance_scores,
    performance_sem,
    rank_with_ties,
    two_sample_t,
)


def kendall_oracle(a, b):
    """Tau-b and its one-tailed normal-approximation p by explicit pair counting."""
    n = len(a)
    s = 0
    for i in range(n):
        for j in range(i + 1, n):
            x = (a[i] > a[j]) - (a[i] < a[j])
            y = (b[i] > b[j]) - (b[i] < b[j])
            s += x * y
    n0 = n * (n - 1) // 2
    ta, tb = Counter(a).values(), Counter(b).values()
    n1 = sum(t * (t - 1) // 2 for t in ta)
    n2 = sum(t * (t - 1) // 2 for t in tb)
    tau = s / math.sqrt((n0 - n1) * (n0 - n2))
    v0 = n * (n - 1) * (2 * n + 5)
    vt = sum(t * (t - 1) * (2 * t + 5) for t in ta)
    vu = sum(t * (t - 1) * (2 * t + 5) for t in tb)
    v1 = sum(t * (t - 1) for t in ta) * sum(t * (t - 1) for t in tb)
    v2 = sum(t * (t - 1) * (t - 2) for t in ta) * sum(t * (t - 1) * (t - 2) for t in tb)
    var = (v0 - vt - vu) / 18 + v1 / (2 * n * (n - 1)) + v2 / (9 * n * (n - 1) * (n - 2))
    z = s / math.sqrt(var)
    return tau, 0.5 * math.erfc(z / math.sqrt(2))


class TestRanks:
    def test_examples(self):
        assert rank_with_ties([0.1, 0.3, 0.2], LOWER_BETTER) == [1, 3, 2]
        assert rank_with_ties([0.1, 0.1, 0.5], LOWER_BETTER) == [1.5, 1.5, 3]
        assert rank_with_ties([7]) == [1]

    def test_direction_flip_reverses(self):
        vals = [3.0, 1.0, 2.0, 2.0, 9.0]
        lo, hi = rank_with_ties(vals, LOWER_BETTER), rank_with_ties(vals, HIGHER_BETTER)
        assert [a + b for a, b in zip(lo, hi)] == [len(vals) + 1] * len(vals)

    def test_rank_sum_identity(self):
        rng = random.Random(1)
        for _ in range(300):
            n = rng.randint(1, 40)
            vals = [rng.choice([0.0, 0.5, 1.0, rng.random()]) for _ in range(n)]
            assert sum(rank_with_ties(vals)) == n * (n + 1) / 2

    def test_errors(self):
        with pytest.raises(DomainError):
            rank_with_ties([1.0, math.nan])
        with pytest.raises(DomainError):
            rank_with_ties([])
        with pytest.raises(DomainError):
            rank_with_ties([1.0], "sideways")


class TestPerformance:
    def test_example(self):
        vi = [[0.0, 0.2, 0.3], [0.1, 0.1, 0.3]]
        assert performance_scores(vi, LOWER_BETTER) == pytest.approx([1.75, 1.25, 0.0])

    def test_best_everywhere_scores_max(self):
        rng = random.Random(2)
        matrix = [[0.0] + [rng.uniform(0.1, 1) for _ in range(17)] for _ in range(10)]
        assert performance_scores(matrix)[0] == 17

    def test_all_tied(self):
        assert performance_scores([[0.4] * 5] * 3) == [5 - 3] * 5

    def test_ragged(self):
        with pytest.raises(DomainError):
            performance_scores([[0.1, 0.2], [0.1]])

    def test_monotone_transform_invariance(self):
        rng = random.Random(3)
        for _ in range(50):
            m = [[rng.choice([rng.random(), 0.5]) for _ in range(6)] for _ in range(8)]
            cubed = [[x**3 + 7 for x in row] for row in m]
            assert performance_scores(m) == performance_scores(cubed)
            assert performance_sem(m) == performance_sem(cubed)

    def test_sem(self):
        mean, sem = mean_sem([1.0, 2.0, 3.0, 4.0])
        assert mean == 2.5
        assert sem == pytest.approx(math.sqrt(5 / 3) / 2)


class TestKendall:
    def test_examples(self):
        assert kendall_tau([1, 2, 3, 4], [1, 2, 3, 4]).tau == pytest.approx(1.0)
        assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]).tau == pytest.approx(-1.0)
        assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]).tau == pytest.approx(2 / 3)

    def test_errors(self):
        with pytest.raises(DomainError):
            kendall_tau([1, 2, 3], [1, 2])
        with pytest.raises(DomainError):
            kendall_tau([1, 2], [1, 2])
        with pytest.raises(DomainError):
            kendall_tau([1, 1, 1], [1, 2, 3])

    def test_against_pair_counting(self):
        rng = random.Random(4)
        for _ in range(500):
            n = rng.randint(3, 40)
            levels = rng.randint(2, 8)
            a = [rng.randrange(levels) for _ in range(n)]
            b = [rng.randrange(levels) for _ in range(n)]
            if len(set(a)) < 2 or len(set(b)) < 2:
                continue
            tau, p = kendall_oracle(a, b)
            res = kendall_tau(a, b)
            assert res.tau == pytest.approx(tau, abs=1e-12)
            assert res.p_one_tailed == pytest.approx(p, rel=1e-9, abs=1e-15)
            assert 0.0 < res.p_one_tailed <= 1.0


class TestTTest:
    def test_examples(self):
        assert two_sample_t([1, 2, 3], [1, 2, 3]) == (0.0, 1.0)
        assert two_sample_t([1, 2, 3], [101, 102, 103])[1] < 1e-4
        t, p = two_sample_t([1, 2, 3, 4], [2, 3, 4, 5])
        assert t == pytest.approx(-1 / math.sqrt(5 / 6), rel=1e-12)
        assert t == pytest.approx(-1.095, abs=1e-3)

    def test_antisymmetry(self):
        rng = random.Random(5)
        for _ in range(100):
            a = [rng.gauss(0, 1) for _ in range(rng.randint(2, 15))]
            b = [rng.gauss(0.5, 2) for _ in range(rng.randint(2, 15))]
            for welch in (False, True):
                t1, p1 = two_sample_t(a, b, welch)
                t2, p2 = two_sample_t(b, a, welch)
                assert t1 == pytest.approx(-t2) and p1 == pytest.approx(p2)
                assert 0 < p1 <= 1

    def test_against_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = random.Random(6)
        a = [rng.gauss(0, 1) for _ in range(12)]
        b = [rng.gauss(1, 1.5) for _ in range(9)]
        for welch in (False, True):
            ref = scipy_stats.ttest_ind(a, b, equal_var=not welch)
            t, p = two_sample_t(a, b, welch)
            assert t == pytest.approx(ref.statistic, rel=1e-10)
            assert p == pytest.approx(ref.pvalue, rel=1e-9)

    def test_degenerate(self):
        assert two_sample_t([2, 2], [3, 3]) == (-math.inf, 0.0)
        with pytest.raises(DomainError):
            two_sample_t([1], [1, 2])
