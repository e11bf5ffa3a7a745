import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smax import (
    DomainError,
    Graph,
    ParseError,
    Partition,
    graph_summary,
    parse_edge_list,
    parse_partition,
    write_edge_list,
    write_partition,
)


def test_lfr_style_reciprocal_edges_collapse():
    g = parse_edge_list("1 2\n2 1\n2 3\n", "one-based", dedupe=True)
    assert g.k == 3
    assert g.edges == ((0, 1), (1, 2))


def test_minimal_zero_based():
    g = parse_edge_list("0 1\n")
    assert (g.k, g.edges) == (2, ((0, 1),))


def test_tabs_and_comments():
    g = parse_edge_list("# header\n1\t2\n\n2 3  # trailing\n", "one-based")
    assert g.edges == ((0, 1), (1, 2))


def test_self_loop_rejected_with_line():
    with pytest.raises(ParseError, match="self-loop at line 1"):
        parse_edge_list("3 3\n")


def test_duplicate_without_dedupe():
    with pytest.raises(ParseError, match="duplicate edge .* at line 2"):
        parse_edge_list("0 1\n1 0\n")


@pytest.mark.parametrize("text, line", [("0 1\n0 x\n", 2), ("0 1 2\n", 1), ("5\n", 1)])
def test_malformed_lines(text, line):
    with pytest.raises(ParseError) as exc:
        parse_edge_list(text)
    assert exc.value.line == line


def test_declared_node_count_keeps_isolated_nodes():
    assert parse_edge_list("0 1\n", k=5).k == 5
    assert parse_edge_list("# nodes: 5\n0 1\n").k == 5
    assert write_edge_list(Graph(4, [(0, 1)]), "one-based") == "# nodes: 4\n1 2\n"


def test_graph_invariants():
    with pytest.raises(DomainError):
        Graph(3, [(0, 0)])
    with pytest.raises(DomainError):
        Graph(3, [(0, 1), (1, 0)])
    g = Graph(4, [(2, 0), (3, 1)])
    assert g.edges == ((0, 2), (1, 3))
    assert g.adjacency == ((2,), (3,), (0,), (1,))


def test_parse_partition_one_based():
    p = parse_partition("1 1\n2 1\n3 2\n", "one-based")
    assert p.communities == [[0, 1], [2]]


def test_parse_partition_canonicalizes_labels():
    p = parse_partition("0 5\n1 5\n")
    assert p.assignment == (0, 0)
    assert p.count == 1


def test_parse_partition_repeated_node():
    with pytest.raises(ParseError, match="node 0 assigned twice"):
        parse_partition("0 1\n0 2\n")


def test_parse_partition_missing_node():
    with pytest.raises(ParseError, match="node 1 missing"):
        parse_partition("0 1\n2 1\n")
    with pytest.raises(ParseError, match="non-integer"):
        parse_partition("0 a\n")


def test_summary_bridged_triangles(bridged_triangles):
    assert graph_summary(bridged_triangles) == (6, 7, 15, [2, 2, 3, 3, 2, 2])


def test_summary_small_cases():
    assert graph_summary(Graph(2, [(0, 1)])) == (2, 1, 1, [1, 1])
    assert graph_summary(Graph(4)) == (4, 0, 6, [0, 0, 0, 0])


def test_write_partition_examples():
    assert write_partition(Partition([0, 0, 1]), "one-based") == "1 1\n2 1\n3 2\n"
    assert write_partition(Partition.singletons(2), "one-based") == "1 1\n2 2\n"


def test_partition_round_trip_random():
    rng = random.Random(7)
    for _ in range(100):
        k = rng.randint(1, 40)
        p = Partition(rng.randrange(rng.randint(1, k)) for _ in range(k))
        for indexing in ("zero-based", "one-based"):
            assert parse_partition(write_partition(p, indexing), indexing) == p


@st.composite
def graphs(draw):
    k = draw(st.integers(2, 25))
    pairs = [(u, v) for u in range(k) for v in range(u + 1, k)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    return Graph(k, chosen)


@given(graphs())
@settings(max_examples=100, deadline=None)
def test_edge_list_round_trip(g):
    for indexing in ("zero-based", "one-based"):
        back = parse_edge_list(write_edge_list(g, indexing), indexing)
        assert back == g
    k, n, F, deg = graph_summary(g)
    assert sum(deg) == 2 * n
    assert 0 <= n <= F == (k * k - k) // 2


def test_partition_helpers():
    p = Partition.from_communities([[2, 0], [1]])
    assert p.assignment == (0, 1, 0)
    assert p.community_sizes == [2, 1]
    with pytest.raises(DomainError):
        Partition.from_communities([[0], [0, 1]])
    assert Partition([3, 3, 9]).relabel_nodes([2, 1, 0]) == Partition([0, 1, 1])
