"""Simple undirected graphs, node partitions and their text formats.

Both file formats are line oriented, whitespace separated and allow ``#``
comments.  Edge lists hold one ``u v`` pair per line; partition files hold
one ``node community`` pair per line.  Files produced by the standard LFR
generator are one-based and list every edge in both directions, which is
what ``indexing="one-based", dedupe=True`` is for.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from .errors import DomainError, ParseError

Indexing = Literal["zero-based", "one-based"]


def _offset(indexing: str) -> int:
    if indexing == "zero-based":
        return 0
    if indexing == "one-based":
        return 1
    raise DomainError(f"unknown indexing {indexing!r}")


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected unweighted graph on nodes ``0..k-1``.

    ``edges`` is stored as a sorted tuple of ``(u, v)`` pairs with ``u < v``.
    """

    k: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __init__(self, k: int, edges: Iterable[tuple[int, int]] = ()):
        if k < 1:
            raise DomainError("a graph needs at least one node")
        seen = set()
        for u, v in edges:
            if u == v:
                raise DomainError(f"self-loop on node {u}")
            if not (0 <= u < k and 0 <= v < k):
                raise DomainError(f"edge ({u}, {v}) outside nodes 0..{k - 1}")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise DomainError(f"duplicate edge {e}")
            seen.add(e)
        ordered = tuple(sorted(seen))
        adj: list[list[int]] = [[] for _ in range(k)]
        for u, v in ordered:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "edges", ordered)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in adj))

    @property
    def n(self) -> int:
        return len(self.edges)

    @property
    def max_links(self) -> int:
        """Number of node pairs, ``(k^2 - k) / 2``."""
        return self.k * (self.k - 1) // 2

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def has_edge(self, u: int, v: int) -> bool:
        a, b = (u, v) if len(self.adjacency[u]) <= len(self.adjacency[v]) else (v, u)
        return b in self.adjacency[a]

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``i`` renamed to ``perm[i]``."""
        return Graph(self.k, ((perm[u], perm[v]) for u, v in self.edges))


@dataclass(frozen=True)
class Partition:
    """Total assignment of nodes ``0..k-1`` to communities.

    Labels are canonicalized on construction: communities are numbered
    ``0..C-1`` in order of first appearance, so two partitions that differ
    only by relabeling compare equal.
    """

    assignment: tuple[int, ...]

    def __init__(self, labels: Iterable[int]):
        remap: dict = {}
        canon = []
        for lab in labels:
            c = remap.get(lab)
            if c is None:
                c = remap[lab] = len(remap)
            canon.append(c)
        if not canon:
            raise DomainError("a partition needs at least one node")
        object.__setattr__(self, "assignment", tuple(canon))

    @classmethod
    def from_communities(cls, communities: Iterable[Iterable[int]], k: int | None = None) -> "Partition":
        groups = [list(c) for c in communities]
        size = k if k is not None else sum(len(c) for c in groups)
        labels = [-1] * size
        for cid, members in enumerate(groups):
            for node in members:
                if not 0 <= node < size:
                    raise DomainError(f"node {node} outside 0..{size - 1}")
                if labels[node] != -1:
                    raise DomainError(f"node {node} assigned twice")
                labels[node] = cid
        missing = [i for i, lab in enumerate(labels) if lab == -1]
        if missing:
            raise DomainError(f"node {missing[0]} has no community")
        return cls(labels)

    @classmethod
    def single(cls, k: int) -> "Partition":
        return cls([0] * k)

    @classmethod
    def singletons(cls, k: int) -> "Partition":
        return cls(range(k))

    @property
    def k(self) -> int:
        return len(self.assignment)

    @property
    def count(self) -> int:
        return max(self.assignment) + 1

    @property
    def communities(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.count)]
        for node, c in enumerate(self.assignment):
            groups[c].append(node)
        return groups

    @property
    def community_sizes(self) -> list[int]:
        sizes = [0] * self.count
        for c in self.assignment:
            sizes[c] += 1
        return sizes

    def __len__(self) -> int:
        return len(self.assignment)

    def __getitem__(self, node: int) -> int:
        return self.assignment[node]

    def relabel_nodes(self, perm: Sequence[int]) -> "Partition":
        """Partition with node ``i`` renamed to ``perm[i]``."""
        labels = [0] * self.k
        for i, c in enumerate(self.assignment):
            labels[perm[i]] = c
        return Partition(labels)


_NODES_HEADER = re.compile(r"^\s*#\s*nodes\s*[:=]\s*(\d+)\s*$", re.MULTILINE)


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _int_pair(tokens: list[str], lineno: int, source: str | None) -> tuple[int, int]:
    if len(tokens) != 2:
        raise ParseError(f"expected 2 integer tokens, got {len(tokens)}", lineno, source)
    try:
        return int(tokens[0]), int(tokens[1])
    except ValueError:
        raise ParseError(f"non-integer token in {' '.join(tokens)!r}", lineno, source) from None


def parse_edge_list(
    text: str,
    indexing: Indexing = "zero-based",
    dedupe: bool = False,
    k: int | None = None,
    source: str | None = None,
) -> Graph:
    """Parse an edge list into a :class:`Graph`.

    The node count is ``max(max id + 1, k, declared)`` where ``declared``
    comes from a ``# nodes: K`` comment line, as written by
    :func:`write_edge_list`; pass ``k`` to keep trailing isolated nodes of
    files without one.  With ``dedupe`` a repeated pair (in either
    direction) is collapsed, otherwise it is an error.
    """
    off = _offset(indexing)
    seen: set[tuple[int, int]] = set()
    top = -1
    header = _NODES_HEADER.search(text)
    if header:
        k = max(k or 0, int(header.group(1)))
    for lineno, toks in _tokens(text):
        u, v = _int_pair(toks, lineno, source)
        u -= off
        v -= off
        if u < 0 or v < 0:
            raise ParseError(f"negative node id for {indexing} input", lineno, source)
        if u == v:
            raise ParseError("self-loop", lineno, source)
        e = (u, v) if u < v else (v, u)
        if e in seen:
            if dedupe:
                continue
            raise ParseError(f"duplicate edge {toks[0]} {toks[1]}", lineno, source)
        seen.add(e)
        top = max(top, e[1])
    size = max(top + 1, k or 0)
    if size < 1:
        raise ParseError("no edges and no declared node count", None, source)
    return Graph(size, seen)


def write_edge_list(g: Graph, indexing: Indexing = "zero-based") -> str:
    """One ``u v`` line per edge after a ``# nodes: K`` header, so isolated
    nodes survive a round trip."""
    off = _offset(indexing)
    return f"# nodes: {g.k}\n" + "".join(f"{u + off} {v + off}\n" for u, v in g.edges)


def parse_partition(
    text: str,
    indexing: Indexing = "zero-based",
    k: int | None = None,
    source: str | None = None,
) -> Partition:
    """Parse ``node community`` lines into a canonical :class:`Partition`.

    Every node ``0..k-1`` must appear exactly once.  When ``k`` is omitted it
    is taken from the largest node id.  Community labels are arbitrary
    integers and are not shifted by ``indexing``.
    """
    off = _offset(indexing)
    labels: dict[int, int] = {}
    for lineno, toks in _tokens(text):
        node, comm = _int_pair(toks, lineno, source)
        node -= off
        if node < 0:
            raise ParseError(f"negative node id for {indexing} input", lineno, source)
        if node in labels:
            raise ParseError(f"node {node} assigned twice", lineno, source)
        labels[node] = comm
    if not labels:
        raise ParseError("empty partition", None, source)
    size = k if k is not None else max(labels) + 1
    extra = [v for v in labels if v >= size]
    if extra:
        raise ParseError(f"node {min(extra)} outside 0..{size - 1}", None, source)
    for node in range(size):
        if node not in labels:
            raise ParseError(f"node {node} missing", None, source)
    return Partition(labels[node] for node in range(size))


def write_partition(p: Partition, indexing: Indexing = "zero-based") -> str:
    """Serialize ``p`` as ``node community`` lines.

    Node ids and community ids are both shifted by the indexing offset, so a
    one-based file numbers communities from 1.
    """
    off = _offset(indexing)
    return "".join(f"{node + off} {c + off}\n" for node, c in enumerate(p.assignment))


def graph_summary(g: Graph) -> tuple[int, int, int, list[int]]:
    """Return ``(k, n, F, degree_sequence)``."""
    return g.k, g.n, g.max_links, g.degrees()
