"""Structural operations: hand-checked cases, brute-force oracles, round trips."""

import json

import numpy as np
import pytest

from shypx.hypergraph import (
    DanglingId,
    DuplicateLink,
    EmptyHyperedge,
    Hypergraph,
    NotASubset,
    Subhypergraph,
    build_hypergraph,
    complement,
    computational_subhypergraph,
    connected_component,
    from_json_dict,
    hypergraph_from_hyperedges,
    load_hypergraph,
    save_hypergraph,
    size_and_density,
    to_json_dict,
)


@pytest.fixture
def two_edge_graph():
    """Hyperedges {0,1,2} and {2,3} over 4 nodes."""
    return hypergraph_from_hyperedges([[0, 1, 2], [2, 3]], num_nodes=4)


@pytest.fixture
def two_component_graph():
    """Hyperedges {0,1} and {2,3}: two disconnected pieces."""
    return hypergraph_from_hyperedges([[0, 1], [2, 3]], num_nodes=4)


class TestBuild:
    def test_minimal(self):
        G = build_hypergraph([(0, 0), (1, 0)], num_nodes=2)
        assert G.num_links == 2
        assert G.num_hyperedges == 1

    def test_duplicate_link(self):
        with pytest.raises(DuplicateLink):
            build_hypergraph([(0, 0), (0, 0), (1, 0)], num_nodes=2)

    def test_dangling_node(self):
        with pytest.raises(DanglingId):
            build_hypergraph([(5, 0)], num_nodes=2)

    def test_empty_hyperedge_in_file(self):
        with pytest.raises(EmptyHyperedge):
            hypergraph_from_hyperedges([[0, 1], []], num_nodes=2)

    def test_hyperedge_ids_compacted(self):
        G = build_hypergraph([(0, 7), (1, 7), (0, 3)], num_nodes=2)
        assert G.num_hyperedges == 2
        # ascending original ids map to 0,1; canonical order is (edge, node)
        assert G.links() == [(0, 0), (0, 1), (1, 1)]

    def test_canonical_link_order(self):
        G = build_hypergraph([(3, 1), (1, 0), (0, 1), (2, 0)], num_nodes=4)
        assert G.links() == [(1, 0), (2, 0), (0, 1), (3, 1)]

    def test_feature_row_mismatch(self):
        with pytest.raises(DanglingId):
            build_hypergraph([(0, 0)], num_nodes=1, features=np.ones((3, 2)))


class TestComputationalSubhypergraph:
    def test_depth_zero_is_trivial(self, two_edge_graph):
        sub = computational_subhypergraph(two_edge_graph, 0, 0)
        assert sub.size == 0
        assert sub.focus_node == 0

    def test_depth_one_hand_bfs(self, two_edge_graph):
        # from node 0, one round reaches hyperedge {0,1,2} only
        sub = computational_subhypergraph(two_edge_graph, 0, 1)
        assert sub.size == 3
        assert set(sub.node_ids()) == {0, 1, 2}

    def test_depth_two_hand_bfs(self, two_edge_graph):
        sub = computational_subhypergraph(two_edge_graph, 0, 2)
        assert sub.size == 5

    def test_monotone_in_depth(self):
        rng = np.random.default_rng(7)
        G = _random_hypergraph(rng, num_nodes=9, num_edges=5)
        for v in range(G.num_nodes):
            prev = computational_subhypergraph(G, v, 0)
            for depth in range(1, 5):
                cur = computational_subhypergraph(G, v, depth)
                assert cur.contains(prev)
                prev = cur


class TestComplement:
    def test_with_itself_is_empty(self, two_edge_graph):
        full = two_edge_graph.full_subhypergraph(0)
        assert complement(full, full).size == 0

    def test_with_empty_is_identity(self, two_edge_graph):
        full = two_edge_graph.full_subhypergraph(0)
        empty = Subhypergraph(two_edge_graph, focus_node=0)
        comp = complement(full, empty)
        assert np.array_equal(comp.kept_links, full.kept_links)
        assert comp.focus_node == 0

    def test_hand_case(self, two_edge_graph):
        comp_full = two_edge_graph.full_subhypergraph(0)
        expl = computational_subhypergraph(two_edge_graph, 0, 1)  # 3 links of {0,1,2}
        rest = complement(comp_full, expl)
        assert rest.size == 2
        assert set(rest.node_ids()) == {2, 3}

    def test_not_a_subset(self, two_edge_graph):
        small = Subhypergraph(two_edge_graph, np.array([0]))
        other = Subhypergraph(two_edge_graph, np.array([1, 2]))
        with pytest.raises(NotASubset):
            complement(small, other)

    def test_involution_and_size_conservation(self):
        rng = np.random.default_rng(3)
        G = _random_hypergraph(rng, num_nodes=10, num_edges=6)
        C = G.full_subhypergraph(0)
        for _ in range(25):
            kept = np.flatnonzero(rng.random(G.num_links) < 0.5)
            S = Subhypergraph(G, kept, 0)
            comp = complement(C, S)
            assert S.size + comp.size == C.size
            back = complement(C, comp)
            assert np.array_equal(back.kept_links, S.kept_links)


class TestConnectedComponent:
    def test_identity_on_connected(self, two_edge_graph):
        full = two_edge_graph.full_subhypergraph(0)
        out = connected_component(full, 0)
        assert np.array_equal(out.kept_links, full.kept_links)

    def test_drops_other_piece(self, two_component_graph):
        full = two_component_graph.full_subhypergraph(0)
        out = connected_component(full, 0)
        assert set(out.node_ids()) == {0, 1}
        assert out.size == 2

    def test_isolated_focus(self, two_component_graph):
        sub = Subhypergraph(two_component_graph, np.array([2, 3]), 0)  # links of {2,3}
        out = connected_component(sub, 0)
        assert out.size == 0
        assert out.focus_node == 0

    def test_idempotent(self):
        rng = np.random.default_rng(11)
        G = _random_hypergraph(rng, num_nodes=10, num_edges=6)
        for _ in range(20):
            kept = np.flatnonzero(rng.random(G.num_links) < 0.6)
            once = connected_component(Subhypergraph(G, kept, 0), 0)
            twice = connected_component(once, 0)
            assert np.array_equal(once.kept_links, twice.kept_links)


class TestSizeAndDensity:
    def test_full_graph_size(self, two_edge_graph):
        full = two_edge_graph.full_subhypergraph()
        report = size_and_density(full, full)
        assert report.size == 5
        assert report.density == 1.0

    def test_partial(self, two_edge_graph):
        expl = Subhypergraph(two_edge_graph, np.array([0, 1]))
        report = size_and_density(expl, two_edge_graph.full_subhypergraph())
        assert report.size == 2
        assert report.density == pytest.approx(0.4)

    def test_empty_reference(self, two_edge_graph):
        empty = Subhypergraph(two_edge_graph)
        assert size_and_density(empty, empty).density == 0.0


def _random_hypergraph(rng, num_nodes, num_edges, features=None):
    """Random connected-ish hypergraph with 2-4 nodes per hyperedge."""
    edges = []
    for _ in range(num_edges):
        deg = int(rng.integers(2, 5))
        edges.append(rng.choice(num_nodes, size=deg, replace=False).tolist())
    return hypergraph_from_hyperedges(edges, num_nodes, features=features)


def _naive_component(G: Hypergraph, kept: set[int], v: int) -> set[int]:
    """Reference: grow the component by fixpoint iteration over kept links."""
    nodes = {v}
    edges: set[int] = set()
    out: set[int] = set()
    changed = True
    while changed:
        changed = False
        for i in kept:
            u, e = int(G.link_nodes[i]), int(G.link_edges[i])
            if i not in out and (u in nodes or e in edges):
                out.add(i)
                nodes.add(u)
                edges.add(e)
                changed = True
    return out


class TestBruteForceOracle:
    """Enumerate all link subsets of small hypergraphs and compare to naive code."""

    def test_all_subsets(self):
        rng = np.random.default_rng(0)
        for trial in range(3):
            G = _random_hypergraph(rng, num_nodes=6, num_edges=3)
            L = G.num_links
            assert L <= 12
            full = G.full_subhypergraph(0)
            for bits in range(2**L):
                kept = [i for i in range(L) if bits >> i & 1]
                S = Subhypergraph(G, np.array(kept, dtype=np.int64), 0)
                got = connected_component(S, 0)
                want = _naive_component(G, set(kept), 0)
                assert set(got.kept_links.tolist()) == want
                comp = complement(full, S)
                assert set(comp.kept_links.tolist()) == set(range(L)) - set(kept)


class TestSerialization:
    def test_round_trip(self, two_edge_graph):
        d = to_json_dict(two_edge_graph)
        G2 = from_json_dict(d)
        assert G2.links() == two_edge_graph.links()
        assert np.array_equal(G2.features, two_edge_graph.features)

    def test_round_trip_with_labels_and_split(self, tmp_path):
        G = build_hypergraph(
            [(0, 0), (1, 0), (2, 1), (1, 1)],
            num_nodes=3,
            features=np.array([[0.1, 0.2], [0.3, 0.4], [1.5, -2.5]]),
            labels=[0, 1, 1],
            split=["train", "val", "train"],
        )
        path = tmp_path / "g.json"
        save_hypergraph(G, path)
        G2 = load_hypergraph(path)
        assert G2.links() == G.links()
        assert np.array_equal(G2.features, G.features)
        assert np.array_equal(G2.labels, G.labels)
        assert np.array_equal(G2.split, G.split)
        assert np.array_equal(G2.train_indices, [0, 2])
        assert np.array_equal(G2.val_indices, [1])

    def test_byte_stable(self, two_edge_graph, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_hypergraph(two_edge_graph, p1)
        save_hypergraph(from_json_dict(to_json_dict(two_edge_graph)), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_file_is_plain_json(self, two_edge_graph, tmp_path):
        path = tmp_path / "g.json"
        save_hypergraph(two_edge_graph, path)
        d = json.loads(path.read_text())
        assert d["num_nodes"] == 4
        assert d["hyperedges"] == [[0, 1, 2], [2, 3]]
