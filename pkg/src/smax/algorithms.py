"""Community detectors and Surprise-based selection among their outputs.

Four detectors are built in: asynchronous label propagation (``lpa``),
agglomerative modularity maximization (``greedy-q``), the two-phase
multilevel modularity scheme (``multilevel-q``) and a direct Surprise
maximizer (``greedy-s``).  :func:`select_smax` keeps whichever candidate
partition, built-in or external, has the highest Surprise.
"""

from __future__ import annotations

import heapq
import logging
import math
import random
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import DomainError
from .graph import Graph, Partition
from .metrics import LN10, QualityScore, log_upper_tail, quality

log = logging.getLogger(__name__)

LPA_MAX_SWEEPS = 1000
REFINE_MAX_SWEEPS = 500
GREEDY_S_RESTARTS = 5
_REMERGE_ROUNDS = 10

# Relative slack on objective comparisons, so float noise cannot cycle moves.
_EPS = 1e-12


class SurpriseEvaluator:
    """``S(M, p)`` for a fixed graph, memoized on ``(M, p)``."""

    def __init__(self, F: int, n: int):
        self.F = F
        self.n = n
        self._cache: dict[tuple[int, int], float] = {}

    def __call__(self, M: int, p: int) -> float:
        key = (M, p)
        s = self._cache.get(key)
        if s is None:
            s = -log_upper_tail(self.F, self.n, M, p) / LN10
            if s < 0.0:
                s = 0.0
            self._cache[key] = s
        return s


def _better(new: float, old: float) -> bool:
    return new > old + _EPS * max(1.0, abs(old))


def _require_edges(g: Graph, what: str) -> None:
    if g.n == 0:
        raise DomainError(f"{what} needs at least one edge")


def label_propagation(g: Graph, seed: int = 0) -> Partition:
    """Asynchronous label propagation.

    A node keeps its label when it is among the most frequent neighbour
    labels; otherwise it picks uniformly among them.  Stops after a sweep
    without changes, or after ``LPA_MAX_SWEEPS``.
    """
    rng = random.Random(seed)
    adj = g.adjacency
    labels = list(range(g.k))
    order = list(range(g.k))
    for _ in range(LPA_MAX_SWEEPS):
        rng.shuffle(order)
        changed = False
        for v in order:
            nbrs = adj[v]
            if not nbrs:
                continue
            counts: dict[int, int] = {}
            for u in nbrs:
                lab = labels[u]
                counts[lab] = counts.get(lab, 0) + 1
            top = max(counts.values())
            if counts.get(labels[v], 0) == top:
                continue
            best = sorted(lab for lab, c in counts.items() if c == top)
            labels[v] = best[0] if len(best) == 1 else rng.choice(best)
            changed = True
        if not changed:
            break
    else:
        log.warning("label propagation hit the %d sweep cap", LPA_MAX_SWEEPS)
    return Partition(labels)


def greedy_modularity(g: Graph) -> Partition:
    """Agglomerative modularity maximization from singletons.

    Merges the connected pair with the largest modularity gain while the gain
    is positive.  Gains are compared as exact integers
    ``2n*e_ij - d_i*d_j``, ties going to the smallest id pair.
    """
    _require_edges(g, "greedy modularity")
    two_n = 2 * g.n
    deg = g.degrees()
    between: list[dict[int, int]] = [dict.fromkeys(a, 1) for a in g.adjacency]
    alive = [True] * g.k
    parent = list(range(g.k))
    heap = [(-(two_n - deg[u] * deg[v]), u, v) for u, v in g.edges]
    heapq.heapify(heap)
    while heap:
        key, i, j = heapq.heappop(heap)
        if -key <= 0:
            break
        if not (alive[i] and alive[j]):
            continue
        e = between[i].get(j)
        if e is None or two_n * e - deg[i] * deg[j] != -key:
            continue
        # merge j into i (i < j)
        alive[j] = False
        parent[j] = i
        deg[i] += deg[j]
        bi = between[i]
        del bi[j]
        for l, w in between[j].items():
            if l == i:
                continue
            bi[l] = bi.get(l, 0) + w
            bl = between[l]
            del bl[j]
            bl[i] = bi[l]
        between[j] = {}
        for l, w in bi.items():
            a, b = (i, l) if i < l else (l, i)
            gain = two_n * w - deg[i] * deg[l]
            if gain > 0:
                heapq.heappush(heap, (-gain, a, b))
    return Partition(_find_all(parent))


def _find_all(parent: list[int]) -> list[int]:
    root = list(parent)
    for v in range(len(root)):
        r = v
        while root[r] != r:
            r = root[r]
        while root[v] != r:
            root[v], v = r, root[v]
    return root


def multilevel_modularity(g: Graph, seed: int = 0) -> Partition:
    """Two-phase multilevel modularity optimization.

    Local node moves in seeded random order until no move gains, then every
    community becomes a node of a weighted aggregate graph; repeated until a
    level makes no move.
    """
    _require_edges(g, "multilevel modularity")
    rng = random.Random(seed)
    two_m = 2.0 * g.n
    # level graph: nbrs[i] = {j: links between i and j}, strength = summed degree
    nbrs: list[dict[int, int]] = [dict.fromkeys(a, 1) for a in g.adjacency]
    strength = [float(len(a)) for a in g.adjacency]
    membership = list(range(g.k))
    while True:
        size = len(nbrs)
        comm = list(range(size))
        tot = list(strength)
        order = list(range(size))
        moved_any = False
        while True:
            rng.shuffle(order)
            moves = 0
            for i in order:
                a = comm[i]
                ki = strength[i]
                links: dict[int, int] = {}
                for j, w in nbrs[i].items():
                    links[comm[j]] = links.get(comm[j], 0) + w
                tot[a] -= ki
                best_c = a
                best_gain = links.get(a, 0) - tot[a] * ki / two_m
                for c in sorted(links):
                    gain = links[c] - tot[c] * ki / two_m
                    if gain > best_gain + 1e-12:
                        best_c, best_gain = c, gain
                tot[best_c] += ki
                if best_c != a:
                    comm[i] = best_c
                    moves += 1
            if moves == 0:
                break
            moved_any = True
        if not moved_any:
            break
        relabel: dict[int, int] = {}
        for c in comm:
            relabel.setdefault(c, len(relabel))
        membership = [relabel[comm[x]] for x in membership]
        agg: list[dict[int, int]] = [dict() for _ in relabel]
        agg_strength = [0.0] * len(relabel)
        for i in range(size):
            ci = relabel[comm[i]]
            agg_strength[ci] += strength[i]
            for j, w in nbrs[i].items():
                cj = relabel[comm[j]]
                if ci != cj:
                    agg[ci][cj] = agg[ci].get(cj, 0) + w
        nbrs = agg
        strength = agg_strength
    return Partition(membership)


def _community_state(g: Graph, labels: Sequence[int]):
    size = [0] * g.k
    for c in labels:
        size[c] += 1
    M = sum(s * (s - 1) // 2 for s in size)
    p = sum(1 for u, v in g.edges if labels[u] == labels[v])
    return size, M, p


def _refine_surprise(g: Graph, labels: list[int], rng: random.Random, S: SurpriseEvaluator) -> list[int]:
    adj = g.adjacency
    size, M, p = _community_state(g, labels)
    free = [c for c in range(g.k - 1, -1, -1) if size[c] == 0]
    current = S(M, p)
    order = list(range(g.k))
    for sweep in range(REFINE_MAX_SWEEPS):
        rng.shuffle(order)
        moved = False
        for v in order:
            a = labels[v]
            links: dict[int, int] = {}
            for u in adj[v]:
                c = labels[u]
                links[c] = links.get(c, 0) + 1
            own = links.pop(a, 0)
            M0 = M - (size[a] - 1)
            p0 = p - own
            best_c = None
            best_s = current
            best_mp = None
            # v alone, then each neighbouring community; a candidate that has
            # no more links than another with fewer pairs cannot win.
            cands = sorted(((size[c], -e, c) for c, e in links.items()))
            if size[a] > 1:
                cands.insert(0, (0, 0, -1))
            top_e = -1
            for sc, neg_e, c in cands:
                e = -neg_e
                if e <= top_e:
                    continue
                top_e = e
                Mc, pc = M0 + sc, p0 + e
                s = S(Mc, pc)
                if _better(s, best_s):
                    best_c, best_s, best_mp = c, s, (Mc, pc)
            if best_c is None:
                continue
            if best_c == -1:
                best_c = free.pop()
            size[a] -= 1
            if size[a] == 0:
                free.append(a)
            size[best_c] += 1
            labels[v] = best_c
            M, p = best_mp
            current = best_s
            moved = True
        if not moved:
            break
    else:
        log.warning("surprise refinement hit the %d sweep cap", REFINE_MAX_SWEEPS)
    return labels


def _refine_modularity(g: Graph, labels: list[int], rng: random.Random) -> list[int]:
    adj = g.adjacency
    two_m = 2.0 * g.n
    deg = g.degrees()
    tot = [0.0] * g.k
    size = [0] * g.k
    for v, c in enumerate(labels):
        tot[c] += deg[v]
        size[c] += 1
    free = [c for c in range(g.k - 1, -1, -1) if size[c] == 0]
    order = list(range(g.k))
    for sweep in range(REFINE_MAX_SWEEPS):
        rng.shuffle(order)
        moved = False
        for v in order:
            a = labels[v]
            kv = deg[v]
            links: dict[int, int] = {}
            for u in adj[v]:
                links[labels[u]] = links.get(labels[u], 0) + 1
            own = links.pop(a, 0)
            stay = own - (tot[a] - kv) * kv / two_m
            best_c, best_gain = None, stay
            if size[a] > 1 and _better(0.0, best_gain):
                best_c, best_gain = -1, 0.0
            for c in sorted(links):
                gain = links[c] - tot[c] * kv / two_m
                if _better(gain, best_gain):
                    best_c, best_gain = c, gain
            if best_c is None:
                continue
            if best_c == -1:
                best_c = free.pop()
            tot[a] -= kv
            size[a] -= 1
            if size[a] == 0:
                free.append(a)
            tot[best_c] += kv
            size[best_c] += 1
            labels[v] = best_c
            moved = True
        if not moved:
            break
    else:
        log.warning("modularity refinement hit the %d sweep cap", REFINE_MAX_SWEEPS)
    return labels


def node_move_refine(g: Graph, start: Partition, objective: str = "surprise", seed: int = 0) -> Partition:
    """Move single nodes between communities, or out into a new singleton,
    while some move strictly improves ``objective`` (``surprise`` or
    ``modularity``).  The result is a fixed point of such moves."""
    if start.k != g.k:
        raise DomainError(f"partition covers {start.k} nodes, graph has {g.k}")
    rng = random.Random(seed)
    labels = list(start.assignment)
    if objective == "surprise":
        labels = _refine_surprise(g, labels, rng, SurpriseEvaluator(g.max_links, g.n))
    elif objective == "modularity":
        if g.n == 0:
            return start
        labels = _refine_modularity(g, labels, rng)
    else:
        raise DomainError(f"unknown objective {objective!r}")
    return Partition(labels)


def _agglomerate_surprise(g: Graph, S: SurpriseEvaluator, start: Sequence[int] | None = None) -> list[int]:
    """Greedy merge sequence, best Surprise merge first.

    Starts from ``start`` (singletons by default) and runs to the end, one
    community per connected component; the labels at the best state visited
    are returned.  Surprise along the sequence is not unimodal, so stopping
    at the first non-improving merge would miss the later peaks where
    sparse communities have coalesced.
    """
    k = g.k
    labels = list(start) if start is not None else list(range(k))
    size, M, p = _community_state(g, labels)
    between: list[dict[int, int]] = [dict() for _ in range(k)]
    for u, v in g.edges:
        a, b = labels[u], labels[v]
        if a != b:
            between[a][b] = between[a].get(b, 0) + 1
            between[b][a] = between[b].get(a, 0) + 1
    alive = [s > 0 for s in size]
    # Pair candidates keyed by size product; within a key, most links first.
    by_product: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
    for a in range(k):
        for b, w in between[a].items():
            if a < b:
                by_product[size[a] * size[b]].append((-w, a, b))
    for h in by_product.values():
        heapq.heapify(h)
    merges: list[tuple[int, int]] = []
    best_s, best_step = S(M, p), 0
    while True:
        frontier = []
        for x in list(by_product):
            h = by_product[x]
            while h:
                neg_e, i, j = h[0]
                if alive[i] and alive[j] and size[i] * size[j] == x and between[i].get(j) == -neg_e:
                    break
                heapq.heappop(h)
            if h:
                frontier.append((x, -h[0][0], h[0][1], h[0][2]))
            else:
                del by_product[x]
        if not frontier:
            break
        frontier.sort(key=lambda t: (t[0], -t[1], t[2], t[3]))
        choice = None
        top_e = -1
        for x, e, i, j in frontier:
            if e <= top_e:
                continue
            top_e = e
            s = S(M + x, p + e)
            if choice is None or _better(s, choice[0]) or (
                not _better(choice[0], s) and (i, j) < (choice[3], choice[4])
            ):
                choice = (s, x, e, i, j)
        s, x, e, i, j = choice
        M += x
        p += e
        merges.append((i, j))
        if _better(s, best_s):
            best_s, best_step = s, len(merges)
        # merge j into i
        alive[j] = False
        size[i] += size[j]
        bi = between[i]
        del bi[j]
        for l, w in between[j].items():
            if l == i:
                continue
            bi[l] = bi.get(l, 0) + w
            bl = between[l]
            del bl[j]
            bl[i] = bi[l]
        between[j] = {}
        for l, w in bi.items():
            a, b = (i, l) if i < l else (l, i)
            heapq.heappush(by_product[size[i] * size[l]], (-w, a, b))
    parent = list(range(k))
    for i, j in merges[:best_step]:
        parent[j] = i
    root = _find_all(parent)
    return [root[c] for c in labels]


def greedy_surprise(g: Graph, seed: int = 0, restarts: int = GREEDY_S_RESTARTS) -> Partition:
    """Direct Surprise maximization.

    Phase 1 agglomerates from singletons by largest Surprise gain and keeps
    the best state of the merge sequence.  Phase 2 refines that state with
    single-node moves; whenever refinement changed something, the refined
    communities are offered to the agglomerator once more.  Phase 2 runs for
    ``restarts`` seeded visiting orders and the best partition is returned.
    """
    _require_edges(g, "greedy surprise")
    S = SurpriseEvaluator(g.max_links, g.n)

    def score(labels):
        return S(*_community_state(g, labels)[1:])

    start = _agglomerate_surprise(g, S)
    best_labels, best_s = start, score(start)
    master = random.Random(seed)
    for _ in range(max(1, restarts)):
        rng = random.Random(master.getrandbits(64))
        labels = _refine_surprise(g, list(start), rng, S)
        s = score(labels)
        for _ in range(_REMERGE_ROUNDS):
            merged = _agglomerate_surprise(g, S, labels)
            s_merged = score(merged)
            if not _better(s_merged, s):
                break
            labels = _refine_surprise(g, merged, rng, S)
            s = score(labels)
        if _better(s, best_s):
            best_labels, best_s = labels, s
    return Partition(best_labels)


@dataclass(frozen=True)
class DetectionResult:
    detector: str
    partition: Partition
    scores: QualityScore
    wall_time: float
    seed: int | None = None


DETECTORS: dict[str, Callable[[Graph, int], Partition]] = {
    "lpa": label_propagation,
    "greedy-q": lambda g, seed=0: greedy_modularity(g),
    "multilevel-q": multilevel_modularity,
    "greedy-s": greedy_surprise,
}


def run_detector(name: str, g: Graph, seed: int = 0) -> DetectionResult:
    try:
        fn = DETECTORS[name]
    except KeyError:
        raise DomainError(f"unknown detector {name!r}; available: {', '.join(DETECTORS)}") from None
    t0 = time.perf_counter()
    part = fn(g, seed)
    elapsed = time.perf_counter() - t0
    return DetectionResult(name, part, quality(g, part), elapsed, seed)


def select_smax(
    g: Graph,
    candidates: Iterable[Partition | DetectionResult | tuple[str, Partition]],
) -> tuple[Partition, list[DetectionResult]]:
    """Pick the candidate with the highest Surprise.

    Ties go to fewer communities, then to the lexicographically smaller
    canonical assignment.  Returns the winner and a scored table of all
    candidates in input order.
    """
    table: list[DetectionResult] = []
    for idx, cand in enumerate(candidates):
        if isinstance(cand, DetectionResult):
            name, part = cand.detector, cand.partition
        else:
            name, part = cand if isinstance(cand, tuple) else (f"candidate-{idx}", cand)
        if part.k != g.k:
            raise DomainError(f"candidate {name!r} covers {part.k} nodes, graph has {g.k}")
        if isinstance(cand, DetectionResult):
            table.append(cand)
        else:
            table.append(DetectionResult(name, part, quality(g, part), 0.0))
    if not table:
        raise DomainError("select_smax needs at least one candidate")
    winner = min(table, key=lambda r: (-r.scores.surprise, r.partition.count, r.partition.assignment))
    return winner.partition, table
