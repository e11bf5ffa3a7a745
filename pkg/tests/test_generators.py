import math

import pytest
import scipy.stats

from smax import DomainError, GenerationError, Partition, log_binomial, partition_counts, surprise_of
from smax.generators import (
    BenchmarkSpec,
    broken_stick_sizes,
    generate,
    generate_rc,
    load_lfr,
    paired_partition,
    parse_spec_file,
    pielou_index,
    ring_of_cliques,
    three_community_net,
)


class TestPielou:
    def test_examples(self):
        assert pielou_index([32, 32, 32, 32]) == 1.0
        assert pielou_index([2, 2, 4]) == pytest.approx(0.94639, abs=1e-5)
        # independent oracle: Shannon entropy over ln 2
        assert pielou_index([100, 1]) == pytest.approx(scipy.stats.entropy([100, 1]) / math.log(2), rel=1e-12)
        assert pielou_index([100, 1]) == pytest.approx(0.080136, abs=1e-6)

    def test_single_community(self):
        with pytest.raises(DomainError, match="Pielou undefined for a single community"):
            pielou_index([7])

    def test_strictly_below_one_when_uneven(self):
        assert pielou_index([3, 3, 4]) < 1.0


class TestBrokenStick:
    def test_equal_sizes(self):
        assert broken_stick_sizes(0, 16, 4, 1.0, 0.001) == [4, 4, 4, 4]

    def test_infeasible(self):
        with pytest.raises(GenerationError):
            broken_stick_sizes(0, 5, 4, 0.9)

    @pytest.mark.parametrize("seed", range(10))
    def test_desk_defaults(self, seed):
        sizes = broken_stick_sizes(seed, 512, 16, 0.75, 0.01)
        assert len(sizes) == 16 and sum(sizes) == 512 and min(sizes) >= 2
        assert abs(scipy.stats.entropy(sizes) / math.log(16) - 0.75) <= 0.01

    def test_deterministic(self):
        assert broken_stick_sizes(42, 300, 9, 0.8) == broken_stick_sizes(42, 300, 9, 0.8)
        assert broken_stick_sizes(42, 300, 9, 0.8) != broken_stick_sizes(43, 300, 9, 0.8)

    def test_unreachable_tolerance_reports_best(self):
        # 3 communities over 6 nodes with minimum size 2: only [2, 2, 2] exists
        with pytest.raises(GenerationError, match="best J found 1.0000"):
            broken_stick_sizes(0, 6, 3, 0.5, 0.01)


def rc(R, seed, **kw):
    return generate_rc(BenchmarkSpec("rc", k=kw.get("k", 512), communities=kw.get("c", 16),
                                     pielou=0.75, R=R, seed=seed))


class TestRelaxedCaveman:
    @pytest.mark.parametrize("seed", range(5))
    def test_clique_identity_at_zero(self, seed):
        net = rc(0, seed)
        F, n, M, p = partition_counts(net.graph, net.truth)
        assert n == M == p
        assert surprise_of(net.graph, net.truth) == pytest.approx(log_binomial(F, n) / math.log(10), rel=1e-9)
        sizes = net.truth.community_sizes
        assert n == sum(s * (s - 1) // 2 for s in sizes)
        assert abs(pielou_index(sizes) - 0.75) <= 0.01

    def test_rewiring_invariants(self):
        for seed in range(100):
            base = rc(0, seed, k=64, c=6)
            base_edges = set(base.graph.edges)
            for R in range(10, 100, 10):
                net = rc(R, seed, k=64, c=6)
                g = net.graph
                assert g.n == base.graph.n
                assert len(set(g.edges)) == g.n and all(u < v for u, v in g.edges)
                assert net.truth == base.truth
                kept = len(base_edges & set(g.edges))
                # removed edges may be re-added, so at least the swap count is untouched
                swaps = math.floor(R / 100 * base.graph.n + 0.5)
                assert kept >= base.graph.n - swaps

    def test_same_edge_count_from_same_seed(self):
        assert rc(10, 3).graph.n == rc(0, 3).graph.n

    def test_full_rewiring_destroys_structure(self):
        net = rc(100, 1)
        assert surprise_of(net.graph, net.truth) < 0.02 * surprise_of(rc(0, 1).graph, rc(0, 1).truth)

    def test_reproducible(self):
        assert rc(40, 9).graph == rc(40, 9).graph
        assert rc(40, 9).graph != rc(40, 10).graph

    def test_bad_R(self):
        with pytest.raises(DomainError):
            rc(120, 0)


class TestRing:
    def test_counts(self):
        net = ring_of_cliques(8, 5)
        assert (net.graph.k, net.graph.n) == (40, 88)
        assert partition_counts(net.graph, net.truth) == (780, 88, 80, 80)
        small = ring_of_cliques(3, 3)
        assert (small.graph.k, small.graph.n) == (9, 12)

    def test_paired(self):
        net = ring_of_cliques(8, 5)
        paired = paired_partition(net)
        assert paired.community_sizes == [10, 10, 10, 10]
        assert partition_counts(net.graph, paired) == (780, 88, 180, 84)
        assert paired_partition(ring_of_cliques(4, 3)).community_sizes == [6, 6]
        with pytest.raises(DomainError):
            paired_partition(ring_of_cliques(3, 5))

    def test_degenerate(self):
        with pytest.raises(DomainError):
            ring_of_cliques(2, 5)

    def test_surprise_prefers_single_cliques(self):
        for c in (8, 30, 200):
            net = ring_of_cliques(c, 5)
            assert surprise_of(net.graph, net.truth) > surprise_of(net.graph, paired_partition(net))


class TestThreeCommunity:
    def test_counts_and_checkpoint(self):
        net = three_community_net(0)
        assert (net.graph.k, net.graph.n) == (426, 20159)
        assert partition_counts(net.graph, net.truth) == (90525, 20159, 79956, 20156)
        assert surprise_of(net.graph, net.truth) == pytest.approx(1230.73, abs=0.5)
        assert net.truth.community_sizes == [400, 13, 13]

    def test_chain_variant(self):
        net = three_community_net(0, inter_links=2)
        assert net.graph.n == 20158
        assert partition_counts(net.graph, net.truth) == (90525, 20158, 79956, 20156)

    def test_seeds_differ_only_in_wiring(self):
        a, b = three_community_net(1), three_community_net(2)
        assert a.graph != b.graph
        assert partition_counts(a.graph, a.truth) == partition_counts(b.graph, b.truth)


class TestSpecs:
    def test_family_parameters_checked(self):
        with pytest.raises(DomainError):
            BenchmarkSpec("ring", R=10)
        with pytest.raises(DomainError):
            BenchmarkSpec("tree")

    def test_stem_and_label(self):
        spec = BenchmarkSpec("rc", k=512, communities=16, pielou=0.75, R=10.0, seed=7)
        assert spec.stem() == "rc-k512-c16-J0.75-R10-7"
        assert spec.label() == "k=512;communities=16;pielou=0.75;R=10"

    def test_spec_file_round_trip(self):
        specs = [BenchmarkSpec("rc", k=64, communities=4, pielou=0.8, R=20.0, seed=3),
                 BenchmarkSpec("ring", cliques=6, clique_size=4)]
        text = "\n".join(s.to_text() for s in specs)
        assert parse_spec_file(text) == specs

    def test_generate_dispatch(self):
        assert generate(BenchmarkSpec("ring", cliques=4, clique_size=3)).graph.k == 12
        with pytest.raises(DomainError):
            generate(BenchmarkSpec("lfr", mu=0.3))


def test_lfr_ingest(tmp_path):
    (tmp_path / "network.dat").write_text("1\t2\n2\t1\n2\t3\n3\t2\n4\t5\n5\t4\n")
    (tmp_path / "community.dat").write_text("1\t1\n2\t1\n3\t1\n4\t2\n5\t2\n")
    net = load_lfr(tmp_path / "network.dat", tmp_path / "community.dat", mu=0.1)
    assert net.graph.edges == ((0, 1), (1, 2), (3, 4))
    assert net.truth == Partition([0, 0, 0, 1, 1])
    assert net.spec.mu == 0.1
