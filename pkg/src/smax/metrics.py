"""Partition quality measures: Surprise, modularity and variation of information.

Surprise is ``-log10`` of an upper hypergeometric tail that routinely sits far
below the smallest positive double, so the tail is accumulated relative to
its leading term and only the logarithm ever leaves this module.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError
from .graph import Graph, Partition

LN10 = math.log(10)

# Below this size lnC(a, b) goes through exact integers; lgamma loses ~1e-9
# absolute accuracy near a = 1e6, which matters only when the result is small.
_EXACT_BINOMIAL_MAX = 64

# Tail sums stop once the bounded remainder is below this fraction of the sum.
_NEGLIGIBLE = 1e-17
_LOG_HALF = math.log(0.5)


class SurpriseInputs(NamedTuple):
    """Counts feeding the Surprise tail.

    ``F`` node pairs, ``n`` links, ``M`` intracommunity pairs and ``p``
    intracommunity links.
    """

    F: int
    n: int
    M: int
    p: int

    def validate(self) -> None:
        F, n, M, p = self
        if not 0 <= n <= F:
            raise DomainError(f"need 0 <= n <= F, got n={n}, F={F}")
        if not 0 <= M <= F:
            raise DomainError(f"need 0 <= M <= F, got M={M}, F={F}")
        if not 0 <= p <= min(M, n):
            raise DomainError(f"need 0 <= p <= min(M, n), got p={p}, M={M}, n={n}")
        if n - p > F - M:
            raise DomainError(f"need n - p <= F - M, got n-p={n - p}, F-M={F - M}")


@dataclass(frozen=True)
class QualityScore:
    surprise: float
    modularity: float | None
    M: int
    p: int


@dataclass(frozen=True)
class ViResult:
    vi_nats: float
    vi_normalized: float


def log_binomial(a: int, b: int, strict: bool = False) -> float:
    """Natural log of ``C(a, b)``.

    Out-of-range ``b`` is an empty coefficient: ``-inf``, or a
    :class:`DomainError` when ``strict`` is set.
    """
    if a < 0:
        raise DomainError(f"log_binomial needs a >= 0, got {a}")
    if b < 0 or b > a:
        if strict:
            raise DomainError(f"C({a}, {b}) is empty")
        return -math.inf
    b = min(b, a - b)
    if b == 0:
        return 0.0
    if b <= _EXACT_BINOMIAL_MAX:
        return math.log(math.comb(a, b))
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def _log_term(F: int, n: int, M: int, j: int) -> float:
    return log_binomial(M, j) + log_binomial(F - M, n - j) - log_binomial(F, n)


def _sum_up(first: float, F: int, n: int, M: int, j: int, stop: int) -> float:
    """Log of ``sum_{i=j}^{stop} T(i)`` given ``log T(j) = first``.

    Terms are accumulated relative to ``T(j)`` with the ratio recurrence
    ``T(i+1)/T(i) = (M-i)(n-i) / ((i+1)(F-M-n+i+1))``.  The pmf is
    log-concave, so once the ratio ``r`` drops below one every later ratio
    is smaller and the remainder is at most ``t r / (1 - r)``.
    """
    FMn = F - M - n
    total = term = 1.0
    log_scale = 0.0
    while j < stop:
        r = ((M - j) * (n - j)) / ((j + 1) * (FMn + j + 1))
        term *= r
        total += term
        j += 1
        if r < 1.0:
            if term * r < _NEGLIGIBLE * (1.0 - r) * total:
                break
        elif total > 1e280:
            total *= 1e-280
            term *= 1e-280
            log_scale += 280 * LN10
    return math.log(total) + log_scale + first


def _sum_down(first: float, F: int, n: int, M: int, j: int, stop: int) -> float:
    """Log of ``sum_{i=stop}^{j} T(i)`` for ``j`` below the mode, walking down."""
    FMn = F - M - n
    total = term = 1.0
    while j > stop:
        r = (j * (FMn + j)) / ((M - j + 1) * (n - j + 1))
        term *= r
        total += term
        j -= 1
        if term * r < _NEGLIGIBLE * (1.0 - r) * total:
            break
    return math.log(total) + first


def log_upper_tail(F: int, n: int, M: int, p: int) -> float:
    """Natural log of ``P(X >= p)`` for ``X ~ Hypergeometric(F, M, n)``."""
    lo = max(0, n - (F - M))
    hi = min(M, n)
    if p <= lo:
        return 0.0
    mode = ((n + 1) * (M + 1)) // (F + 2)
    if p > mode:
        return _sum_up(_log_term(F, n, M, p), F, n, M, p, hi)
    # The tail holds the mode; sum the complementary lower tail instead so
    # that log(1 - L) keeps full relative accuracy when L is tiny.
    log_lower = _sum_down(_log_term(F, n, M, p - 1), F, n, M, p - 1, lo)
    if log_lower < _LOG_HALF:
        return math.log1p(-math.exp(log_lower))
    return _sum_up(_log_term(F, n, M, p), F, n, M, p, hi)


def surprise(inputs: SurpriseInputs | tuple[int, int, int, int]) -> float:
    """Surprise of the counts ``(F, n, M, p)``, base-10, always ``>= 0``."""
    inputs = SurpriseInputs(*inputs)
    inputs.validate()
    value = -log_upper_tail(*inputs) / LN10
    return value if value > 0.0 else 0.0


def partition_counts(g: Graph, part: Partition) -> SurpriseInputs:
    if part.k != g.k:
        raise DomainError(f"partition covers {part.k} nodes, graph has {g.k}")
    lab = part.assignment
    M = sum(s * (s - 1) // 2 for s in part.community_sizes)
    p = sum(1 for u, v in g.edges if lab[u] == lab[v])
    return SurpriseInputs(g.max_links, g.n, M, p)


def surprise_of(g: Graph, part: Partition) -> float:
    return surprise(partition_counts(g, part))


def modularity(g: Graph, part: Partition) -> float:
    """Newman-Girvan modularity ``sum_c e_c/n - (d_c/2n)^2``."""
    if part.k != g.k:
        raise DomainError(f"partition covers {part.k} nodes, graph has {g.k}")
    if g.n == 0:
        raise DomainError("modularity undefined for n = 0")
    lab = part.assignment
    C = part.count
    intra = [0] * C
    degree = [0] * C
    for u, v in g.edges:
        degree[lab[u]] += 1
        degree[lab[v]] += 1
        if lab[u] == lab[v]:
            intra[lab[u]] += 1
    two_n = 2 * g.n
    return math.fsum(e / g.n - (d / two_n) ** 2 for e, d in zip(intra, degree))


def quality(g: Graph, part: Partition) -> QualityScore:
    counts = partition_counts(g, part)
    q = modularity(g, part) if g.n else None
    return QualityScore(surprise(counts), q, counts.M, counts.p)


def variation_of_information(a: Partition, b: Partition) -> ViResult:
    """Variation of information in nats, plus the value scaled by ``ln k``.

    Evaluated as ``(1/k) sum n_ij ln(a_i b_j / n_ij^2)`` so that every term is
    non-negative and identical partitions give exactly zero.
    """
    if a.k != b.k:
        raise DomainError(f"partitions cover {a.k} and {b.k} nodes")
    k = a.k
    joint = Counter(zip(a.assignment, b.assignment))
    size_a = a.community_sizes
    size_b = b.community_sizes
    vi = math.fsum(
        nij * math.log((size_a[i] * size_b[j]) / (nij * nij)) for (i, j), nij in joint.items()
    ) / k
    if k < 2:
        return ViResult(0.0, 0.0)
    ln_k = math.log(k)
    vi = min(max(vi, 0.0), ln_k)
    return ViResult(vi, vi / ln_k)
