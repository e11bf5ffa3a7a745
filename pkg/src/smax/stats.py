"""Ranking and significance arithmetic for comparing algorithms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy import stats as _sps

from .errors import DomainError

LOWER_BETTER = "lower-better"
HIGHER_BETTER = "higher-better"


@dataclass(frozen=True)
class CorrelationResult:
    tau: float
    p_one_tailed: float


def _check_direction(direction: str) -> None:
    if direction not in (LOWER_BETTER, HIGHER_BETTER):
        raise DomainError(f"direction must be {LOWER_BETTER!r} or {HIGHER_BETTER!r}, got {direction!r}")


def rank_with_ties(values: Sequence[float], direction: str = LOWER_BETTER) -> list[float]:
    """Ranks starting at 1 for the best value; tied values share the mean of
    the ranks they span."""
    _check_direction(direction)
    vals = [float(v) for v in values]
    if not vals:
        raise DomainError("cannot rank an empty list")
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("cannot rank non-finite values")
    sign = 1.0 if direction == LOWER_BETTER else -1.0
    order = sorted(range(len(vals)), key=lambda i: sign * vals[i])
    ranks = [0.0] * len(vals)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and vals[order[j + 1]] == vals[order[i]]:
            j += 1
        shared = (i + j) / 2 + 1
        for idx in order[i : j + 1]:
            ranks[idx] = shared
        i = j + 1
    return ranks


def _rank_matrix(matrix: Sequence[Sequence[float]], direction: str) -> list[list[float]]:
    rows = [list(r) for r in matrix]
    if not rows:
        raise DomainError("need at least one network")
    width = len(rows[0])
    if width < 2:
        raise DomainError("need at least two algorithms")
    if any(len(r) != width for r in rows):
        raise DomainError("ragged metric matrix")
    return [rank_with_ties(r, direction) for r in rows]


def performance_scores(matrix: Sequence[Sequence[float]], direction: str = LOWER_BETTER) -> list[float]:
    """``N_alg - mean rank`` per algorithm (column) over networks (rows).

    An algorithm best on every network scores ``N_alg - 1``; worst
    everywhere scores 0.
    """
    ranks = _rank_matrix(matrix, direction)
    n_alg = len(ranks[0])
    return [n_alg - math.fsum(r[a] for r in ranks) / len(ranks) for a in range(n_alg)]


def performance_sem(matrix: Sequence[Sequence[float]], direction: str = LOWER_BETTER) -> list[float]:
    """Standard error of the mean of the per-network scores behind
    :func:`performance_scores` (0 with a single network)."""
    ranks = _rank_matrix(matrix, direction)
    if len(ranks) < 2:
        return [0.0] * len(ranks[0])
    return [_sem([r[a] for r in ranks]) for a in range(len(ranks[0]))]


def _sem(xs: Sequence[float]) -> float:
    if len(xs) < 2:
        return 0.0
    mean = math.fsum(xs) / len(xs)
    var = math.fsum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
    return math.sqrt(var / len(xs))


def mean_sem(xs: Sequence[float]) -> tuple[float, float]:
    if not xs:
        return math.nan, math.nan
    return math.fsum(xs) / len(xs), _sem(xs)


def kendall_tau(a: Sequence[float], b: Sequence[float]) -> CorrelationResult:
    """Kendall tau-b with a one-tailed p-value for positive association.

    The p-value comes from the normal approximation with tie-corrected
    variance.
    """
    if len(a) != len(b):
        raise DomainError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 3:
        raise DomainError("kendall_tau needs at least 3 pairs")
    if len(set(a)) < 2 or len(set(b)) < 2:
        raise DomainError("tau-b undefined when either input is constant")
    res = _sps.kendalltau(a, b, variant="b", method="asymptotic", alternative="greater")
    tau = max(-1.0, min(1.0, float(res.statistic)))
    return CorrelationResult(tau, float(res.pvalue))


def two_sample_t(a: Sequence[float], b: Sequence[float], welch: bool = False) -> tuple[float, float]:
    """Two-sample t statistic and two-tailed p-value.

    Pooled-variance Student test by default; ``welch=True`` uses separate
    variances and the Welch-Satterthwaite degrees of freedom.
    """
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise DomainError("each sample needs at least 2 values")
    ma, mb = math.fsum(a) / na, math.fsum(b) / nb
    va = math.fsum((x - ma) ** 2 for x in a) / (na - 1)
    vb = math.fsum((x - mb) ** 2 for x in b) / (nb - 1)
    diff = ma - mb
    if welch:
        se2 = va / na + vb / nb
        df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1)) if se2 > 0 else na + nb - 2
    else:
        df = na + nb - 2
        se2 = ((na - 1) * va + (nb - 1) * vb) / df * (1 / na + 1 / nb)
    if se2 == 0.0:
        if diff == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, diff), 0.0
    t = diff / math.sqrt(se2)
    p = 2.0 * float(_sps.t.sf(abs(t), df))
    return t, min(p, 1.0)
