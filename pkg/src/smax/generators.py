"""Benchmark networks with planted community structure.

Three families are generated here: relaxed caveman graphs (cliques with a
percentage of their links rewired), rings of cliques, and a network of one
large random community plus two small cliques.  LFR networks come from the
standard external generator and are only read back (:func:`load_lfr`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import DomainError, GenerationError, ParseError
from .graph import Graph, Partition, parse_edge_list, parse_partition

FAMILIES = ("rc", "ring", "three", "lfr")

# Parameters each family accepts; "seed" is accepted by every family.
_FAMILY_PARAMS = {
    "rc": {"k", "communities", "pielou", "R", "tolerance"},
    "ring": {"cliques", "clique_size"},
    "three": {"inter_links"},
    "lfr": {"mu", "edges_path", "truth_path"},
}

_MAX_RETRIES = 200


@dataclass(frozen=True)
class BenchmarkSpec:
    """Generator family and its parameters.

    Only the fields of the named family may be set; the rest stay ``None``.
    ``R`` is a percentage, ``mu`` is LFR metadata carried through to reports.
    """

    family: str
    k: int | None = None
    communities: int | None = None
    pielou: float | None = None
    R: float | None = None
    tolerance: float | None = None
    cliques: int | None = None
    clique_size: int | None = None
    inter_links: int | None = None
    mu: float | None = None
    edges_path: str | None = None
    truth_path: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        allowed = _FAMILY_PARAMS[self.family]
        for f in fields(self):
            if f.name in ("family", "seed"):
                continue
            if getattr(self, f.name) is not None and f.name not in allowed:
                raise DomainError(f"parameter {f.name!r} does not apply to family {self.family!r}")

    def params(self) -> dict:
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in ("family", "seed") and getattr(self, f.name) is not None
        }

    def label(self) -> str:
        """Compact ``key=value`` description of the parameters (no seed)."""
        return ";".join(f"{k}={_fmt(v)}" for k, v in self.params().items() if not k.endswith("_path"))

    def stem(self) -> str:
        """File stem ``<family>-<params>-<seed>``."""
        parts = [f"{_SHORT.get(k, k)}{_fmt(v)}" for k, v in self.params().items() if not k.endswith("_path")]
        return "-".join([self.family, *parts, str(self.seed)])

    def with_seed(self, seed: int) -> "BenchmarkSpec":
        return replace(self, seed=seed)

    def to_text(self) -> str:
        lines = [f"family = {self.family}"]
        lines += [f"{k} = {_fmt(v)}" for k, v in self.params().items()]
        lines.append(f"seed = {self.seed}")
        return "\n".join(lines) + "\n"


_SHORT = {"k": "k", "communities": "c", "pielou": "J", "R": "R", "tolerance": "tol",
          "cliques": "c", "clique_size": "s", "inter_links": "L", "mu": "mu"}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


@dataclass(frozen=True)
class GroundTruthNetwork:
    graph: Graph
    truth: Partition
    spec: BenchmarkSpec

    def __post_init__(self):
        if self.truth.k != self.graph.k:
            raise DomainError(f"truth covers {self.truth.k} nodes, graph has {self.graph.k}")


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(BenchmarkSpec)}
    if name not in types:
        raise DomainError(f"unknown spec key {name!r}")
    t = types[name]
    if "int" in t:
        return int(raw)
    if "float" in t:
        return float(raw)
    return raw


def spec_from_mapping(values: dict) -> BenchmarkSpec:
    """Build a spec from string or typed values, e.g. parsed file stanzas."""
    kwargs = {}
    for key, raw in values.items():
        if raw is None:
            continue
        kwargs[key] = _coerce(key, raw) if isinstance(raw, str) and key != "family" else raw
    if "family" not in kwargs:
        raise DomainError("spec is missing 'family'")
    return BenchmarkSpec(**kwargs)


def parse_stanzas(text: str, source: str | None = None) -> list[dict[str, str]]:
    """Split ``key = value`` text into blank-line separated stanzas."""
    stanzas: list[dict[str, str]] = []
    current: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if current:
                stanzas.append(current)
                current = {}
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno, source)
        key, value = (s.strip() for s in line.split(sep, 1))
        if key in current:
            raise ParseError(f"repeated key {key!r}", lineno, source)
        current[key] = value
    if current:
        stanzas.append(current)
    return stanzas


def parse_spec_file(text: str, source: str | None = None) -> list[BenchmarkSpec]:
    specs = []
    for stanza in parse_stanzas(text, source):
        try:
            specs.append(spec_from_mapping(stanza))
        except (DomainError, ValueError) as exc:
            raise ParseError(str(exc), None, source) from None
    return specs


def pielou_index(sizes) -> float:
    """Shannon evenness of community sizes, ``H' / ln c``."""
    sizes = list(sizes)
    c = len(sizes)
    if c < 2:
        raise DomainError("Pielou undefined for a single community")
    if min(sizes) < 1:
        raise DomainError("community sizes must be positive")
    total = sum(sizes)
    if len(set(sizes)) == 1:
        return 1.0
    h = -math.fsum(s / total * math.log(s / total) for s in sizes)
    return min(h / math.log(c), 1.0)


def _apportion(weights: np.ndarray, k: int, minimum: int) -> list[int]:
    """Largest-remainder rounding of ``weights`` to integers summing to ``k``,
    each at least ``minimum``."""
    c = len(weights)
    spare = k - minimum * c
    share = weights / weights.sum() * spare
    base = np.floor(share).astype(int)
    left = spare - int(base.sum())
    order = np.argsort(-(share - base), kind="stable")
    base[order[:left]] += 1
    return [int(b) + minimum for b in base]


def broken_stick_sizes(seed: int, k: int, c: int, target_J: float, tolerance: float = 0.01) -> list[int]:
    """Community sizes from a broken stick, tuned to a Pielou evenness.

    Segment lengths from ``c - 1`` uniform breakpoints are raised to an
    exponent found by bisection (0 gives equal sizes, larger values spread
    them out) until the rounded sizes have ``|J - target_J| <= tolerance``.
    A new stick is drawn when bisection stalls, up to 200 times.
    """
    if c < 2:
        raise DomainError("need at least 2 communities")
    if k < 2 * c:
        raise GenerationError(f"cannot give each of {c} communities 2 of {k} nodes")
    if not 0 < target_J <= 1:
        raise DomainError(f"Pielou target must lie in (0, 1], got {target_J}")
    rng = np.random.default_rng(seed)
    best: tuple[float, list[int]] | None = None
    for _ in range(_MAX_RETRIES):
        cuts = np.sort(rng.random(c - 1))
        lengths = np.diff(np.concatenate(([0.0], cuts, [1.0])))
        lengths = np.maximum(lengths, 1e-12)

        def at(theta: float) -> tuple[float, list[int]]:
            sizes = _apportion(lengths**theta, k, 2)
            return pielou_index(sizes), sizes

        lo, hi = 0.0, 1.0
        j_hi, sizes = at(hi)
        while j_hi > target_J and hi < 256:
            lo, hi = hi, hi * 2
            j_hi, sizes = at(hi)
        for theta in (lo, hi):
            j, sizes = at(theta)
            if abs(j - target_J) <= tolerance:
                return sizes
            if best is None or abs(j - target_J) < abs(best[0] - target_J):
                best = (j, sizes)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            j, sizes = at(mid)
            if abs(j - target_J) <= tolerance:
                return sizes
            if abs(j - target_J) < abs(best[0] - target_J):
                best = (j, sizes)
            if j > target_J:
                lo = mid
            else:
                hi = mid
    raise GenerationError(
        f"no size vector within {tolerance} of J={target_J}; best J found {best[0]:.4f}"
    )


def _blocks(sizes) -> tuple[list[tuple[int, int]], list[int]]:
    edges = []
    labels = []
    start = 0
    for cid, s in enumerate(sizes):
        members = range(start, start + s)
        edges.extend((u, v) for u in members for v in members if u < v)
        labels.extend([cid] * s)
        start += s
    return edges, labels


def generate_rc(spec: BenchmarkSpec) -> GroundTruthNetwork:
    """Relaxed caveman graph: cliques from :func:`broken_stick_sizes`, then
    ``round(R% of links)`` removed and the same number re-added between
    random non-adjacent pairs."""
    if spec.family != "rc":
        raise DomainError(f"generate_rc needs family 'rc', got {spec.family!r}")
    k = spec.k if spec.k is not None else 512
    c = spec.communities if spec.communities is not None else 16
    J = spec.pielou if spec.pielou is not None else 0.75
    R = spec.R if spec.R is not None else 0.0
    tol = spec.tolerance if spec.tolerance is not None else 0.01
    if not 0 <= R <= 100:
        raise DomainError(f"R must be a percentage in [0, 100], got {R}")
    root = np.random.SeedSequence(spec.seed)
    size_seed, wire_seed = root.spawn(2)
    sizes = broken_stick_sizes(int(size_seed.generate_state(1)[0]), k, c, J, tol)
    edges, labels = _blocks(sizes)
    n0 = len(edges)
    swaps = math.floor(R / 100 * n0 + 0.5)
    if swaps:
        rng = np.random.default_rng(wire_seed)
        drop = set(rng.choice(n0, size=swaps, replace=False).tolist())
        kept = {e for i, e in enumerate(edges) if i not in drop}
        added = 0
        while added < swaps:
            batch = rng.integers(0, k, size=(2 * (swaps - added) + 16, 2))
            for u, v in batch.tolist():
                if u == v:
                    continue
                e = (u, v) if u < v else (v, u)
                if e in kept:
                    continue
                kept.add(e)
                added += 1
                if added == swaps:
                    break
        edges = kept
    return GroundTruthNetwork(Graph(k, edges), Partition(labels), spec)


def ring_of_cliques(c: int, clique_size: int) -> GroundTruthNetwork:
    """``c`` cliques in a cycle; node 0 of clique i links node 1 of clique i+1."""
    if c < 3:
        raise DomainError(f"a ring needs at least 3 cliques, got {c}")
    if clique_size < 3:
        raise DomainError(f"cliques need at least 3 nodes, got {clique_size}")
    edges, labels = _blocks([clique_size] * c)
    for i in range(c):
        j = (i + 1) % c
        edges.append((i * clique_size, j * clique_size + 1))
    spec = BenchmarkSpec("ring", cliques=c, clique_size=clique_size)
    return GroundTruthNetwork(Graph(c * clique_size, edges), Partition(labels), spec)


def paired_partition(net: GroundTruthNetwork) -> Partition:
    """Merge cliques ``2i`` and ``2i+1`` of a ring of cliques."""
    if net.spec.family != "ring":
        raise DomainError("paired_partition needs a ring-of-cliques network")
    c = net.spec.cliques
    if c % 2:
        raise DomainError(f"cannot pair an odd number of cliques ({c})")
    return Partition(lab // 2 for lab in net.truth.assignment)


def _connected(k: int, edges) -> bool:
    adj: list[list[int]] = [[] for _ in range(k)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * k
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return all(seen)


def three_community_net(seed: int = 0, inter_links: int = 3) -> GroundTruthNetwork:
    """A 400-node random community with 20000 links plus two 13-cliques.

    With ``inter_links=3`` every pair of communities shares one link (a
    triangle); with 2 they form a chain large-small-small.
    """
    if inter_links not in (2, 3):
        raise DomainError(f"inter_links must be 2 or 3, got {inter_links}")
    big, small, big_links = 400, 13, 20000
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(big, 1)
    while True:
        pick = rng.choice(len(rows), size=big_links, replace=False)
        edges = list(zip(rows[pick].tolist(), cols[pick].tolist()))
        if _connected(big, edges):
            break
    b0, c0 = big, big + small
    for start in (b0, c0):
        edges.extend((u, v) for u in range(start, start + small) for v in range(u + 1, start + small))
    if inter_links == 3:
        edges += [(0, b0), (1, c0), (b0 + 1, c0 + 1)]
    else:
        edges += [(0, b0), (b0 + 1, c0)]
    labels = [0] * big + [1] * small + [2] * small
    spec = BenchmarkSpec("three", inter_links=inter_links, seed=seed)
    return GroundTruthNetwork(Graph(big + 2 * small, edges), Partition(labels), spec)


def load_lfr(edges_path, truth_path, mu: float | None = None) -> GroundTruthNetwork:
    """Read a ``network.dat`` / ``community.dat`` pair from the LFR generator."""
    edges_text = Path(edges_path).read_text()
    truth_text = Path(truth_path).read_text()
    truth = parse_partition(truth_text, "one-based", source=str(truth_path))
    g = parse_edge_list(edges_text, "one-based", dedupe=True, k=truth.k, source=str(edges_path))
    if g.k != truth.k:
        raise ParseError(f"graph has {g.k} nodes but truth covers {truth.k}", None, str(truth_path))
    spec = BenchmarkSpec("lfr", mu=mu, edges_path=str(edges_path), truth_path=str(truth_path))
    return GroundTruthNetwork(g, truth, spec)


def generate(spec: BenchmarkSpec) -> GroundTruthNetwork:
    """Dispatch on ``spec.family``."""
    if spec.family == "rc":
        return generate_rc(spec)
    if spec.family == "ring":
        return ring_of_cliques(spec.cliques or 8, spec.clique_size or 5)
    if spec.family == "three":
        return three_community_net(spec.seed, spec.inter_links or 3)
    if spec.family == "lfr":
        if not (spec.edges_path and spec.truth_path):
            raise DomainError("lfr specs need edges_path and truth_path")
        return load_lfr(spec.edges_path, spec.truth_path, spec.mu)
    raise DomainError(f"unknown family {spec.family!r}")
