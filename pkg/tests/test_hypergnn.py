"""Model semantics: masking, restriction consistency, training, checkpoints."""

import numpy as np
import pytest

from shypx import autodiff as ad
from shypx import hypergnn as hg
from shypx.hypergraph import (
    MissingLabels,
    Subhypergraph,
    build_hypergraph,
    computational_subhypergraph,
    hypergraph_from_hyperedges,
)


def small_graph(rng, num_nodes=8, num_edges=4, num_classes=3, d=3):
    edges = []
    for _ in range(num_edges):
        deg = int(rng.integers(2, 5))
        edges.append(rng.choice(num_nodes, size=deg, replace=False).tolist())
    n_train = max(1, int(0.8 * num_nodes))
    split = np.array(["train"] * n_train + ["val"] * (num_nodes - n_train))
    return hypergraph_from_hyperedges(
        edges, num_nodes,
        features=rng.normal(size=(num_nodes, d)),
        labels=rng.integers(0, num_classes, size=num_nodes),
        split=split,
    )


@pytest.fixture
def graph():
    return small_graph(np.random.default_rng(0))


@pytest.fixture(params=[hg.SUM, hg.ATTENTION])
def model(request, graph):
    return hg.model_for_graph(graph, num_layers=2, hidden_dim=5,
                              aggregation=request.param, seed=1)


def rebuild(sub: Subhypergraph):
    """Physically rebuild a subhypergraph with local ids; returns the
    compiled graph and the parent->local node map."""
    G = sub.parent
    nodes = sub.node_ids()
    local = {int(v): i for i, v in enumerate(nodes)}
    edge_ids = {int(e): i for i, e in enumerate(sub.hyperedge_ids())}
    link_nodes = [local[int(G.link_nodes[i])] for i in sub.kept_links]
    link_edges = [edge_ids[int(G.link_edges[i])] for i in sub.kept_links]
    cg = hg.CompiledGraph(len(nodes), len(edge_ids), link_nodes, link_edges,
                          G.features[nodes])
    return cg, local


class TestForwardSemantics:
    def test_rows_are_distributions(self, graph, model):
        probs = hg.forward(model, graph)
        assert (probs >= 0).all()
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_zero_mask_equals_featureless_forward(self, graph, model):
        # random nonzero weights so the test is not vacuous
        for k, v in model.params.items():
            model.params[k] = np.random.default_rng(3).normal(size=v.shape) * 0.3
        zeroed = hg.forward(model, graph, mask=np.zeros(graph.num_links))
        # an edgeless graph with the same features
        empty = hg.CompiledGraph(graph.num_nodes, 0, [], [], graph.features)
        want = hg.forward(model, empty, mask=np.zeros(0))
        assert np.allclose(zeroed, want, atol=1e-12)

    def test_hyperedge_id_permutation_invariance(self, graph, model):
        probs = hg.forward(model, graph)
        rng = np.random.default_rng(5)
        perm = rng.permutation(graph.num_hyperedges)
        shuffled = build_hypergraph(
            [(v, int(perm[e])) for v, e in graph.links()],
            graph.num_nodes, graph.features,
        )
        probs2 = hg.forward(model, shuffled)
        assert np.allclose(probs, probs2, atol=1e-12)

    def test_hand_evaluated_update(self):
        # one hyperedge {a, b}, scalar states, weights picked so that the
        # hyperedge state is x_a + x_b and each node outputs that state
        G = hypergraph_from_hyperedges([[0, 1]], 2,
                                       features=np.array([[1.0], [2.0]]))
        m = hg.init_model(1, 2, num_layers=1, hidden_dim=1)
        p = m.params
        p["l0.edge_w1"][:] = 1.0
        p["l0.edge_w2"][:] = 1.0
        p["l0.node_wself"][:] = 0.0
        p["l0.node_wmsg"][:] = 1.0
        p["l0.node_w2"][:] = 1.0
        z, _, _ = hg.forward_states(m, hg.CompiledGraph.from_hypergraph(G),
                                    np.ones(2))
        assert np.allclose(ad.value_of(z), [[3.0], [3.0]])


class TestRestrictionConsistency:
    def test_masked_equals_rebuilt(self, graph, model):
        rng = np.random.default_rng(7)
        full = hg.forward(model, graph)
        for _ in range(10):
            kept = np.flatnonzero(rng.random(graph.num_links) < 0.6)
            if kept.size == 0:
                continue
            sub = Subhypergraph(graph, kept)
            masked = hg.forward(model, graph, mask=sub.link_mask())
            cg, local = rebuild(sub)
            probs_local = hg.forward(model, cg)
            for v, i in local.items():
                # nodes keeping all their links agree exactly with the rebuild
                if set(np.flatnonzero(graph.link_nodes == v)) <= set(kept.tolist()):
                    assert np.abs(masked[v] - probs_local[i]).max() <= 1e-9
        assert full.shape == (graph.num_nodes, graph.num_classes)

    def test_receptive_field_equality(self, graph, model):
        full = hg.forward(model, graph)
        for v in range(graph.num_nodes):
            comp = computational_subhypergraph(graph, v, model.num_layers)
            masked = hg.forward(model, graph, mask=comp.link_mask())
            assert np.abs(masked[v] - full[v]).max() <= 1e-9

    def test_focus_prediction_matches_local_rebuild(self, graph, model):
        for v in range(graph.num_nodes):
            comp = computational_subhypergraph(graph, v, model.num_layers)
            if comp.size == 0:
                continue
            masked = hg.forward(model, graph, mask=comp.link_mask())
            cg, local = rebuild(comp)
            probs_local = hg.forward(model, cg)
            assert np.abs(masked[v] - probs_local[local[v]]).max() <= 1e-9


class TestAttention:
    def test_requires_attention_model(self, graph):
        m = hg.model_for_graph(graph, aggregation=hg.SUM)
        with pytest.raises(hg.NotAnAttentionModel):
            hg.attention_weights(m, graph)

    def test_singleton_edge_attention_is_one(self):
        G = hypergraph_from_hyperedges([[0], [1, 2]], 3)
        m = hg.model_for_graph(G, num_layers=1, aggregation=hg.ATTENTION, seed=0, num_classes=2)
        cg = hg.CompiledGraph.from_hypergraph(G)
        _, _, attns = hg.forward_states(m, cg, cg.full_mask(),
                                        collect_attention=True)
        node_to_edge = attns[0]
        assert node_to_edge[0] == pytest.approx(1.0)

    def test_per_edge_attention_sums_to_one(self, graph):
        m = hg.model_for_graph(graph, aggregation=hg.ATTENTION, seed=2)
        cg = hg.CompiledGraph.from_hypergraph(graph)
        _, _, attns = hg.forward_states(m, cg, cg.full_mask(),
                                        collect_attention=True)
        for layer in range(m.num_layers):
            sums = cg.by_edge.sum(attns[2 * layer])
            assert np.allclose(sums, 1.0)

    def test_equal_states_split_evenly(self):
        G = hypergraph_from_hyperedges([[0, 1]], 2,
                                       features=np.array([[1.0, 2.0], [1.0, 2.0]]))
        m = hg.model_for_graph(G, num_layers=1, aggregation=hg.ATTENTION, seed=0, num_classes=2)
        cg = hg.CompiledGraph.from_hypergraph(G)
        _, _, attns = hg.forward_states(m, cg, cg.full_mask(),
                                        collect_attention=True)
        # node->edge direction: equal states share the hyperedge evenly;
        # edge->node: each node has a single link, so attention is 1
        assert np.allclose(attns[0], [0.5, 0.5])
        assert np.allclose(attns[1], [1.0, 1.0])
        assert np.allclose(hg.attention_weights(m, G), [0.75, 0.75])

    def test_mean_over_layers_and_directions(self, graph):
        m = hg.model_for_graph(graph, aggregation=hg.ATTENTION, seed=2)
        cg = hg.CompiledGraph.from_hypergraph(graph)
        _, _, attns = hg.forward_states(m, cg, cg.full_mask(),
                                        collect_attention=True)
        assert len(attns) == 2 * m.num_layers
        assert np.allclose(hg.attention_weights(m, graph), np.mean(attns, axis=0))


class TestTraining:
    def test_zero_epochs_leaves_model_unchanged(self, graph):
        m = hg.model_for_graph(graph, seed=0)
        before = {k: v.copy() for k, v in m.params.items()}
        res = hg.train(m, graph, hg.TrainConfig(epochs=0))
        for k in before:
            assert np.array_equal(res.model.params[k], before[k])

    def test_learns_separable_task(self):
        # features directly encode the label; a couple hundred epochs suffice
        rng = np.random.default_rng(1)
        n = 30
        labels = rng.integers(0, 2, size=n)
        X = np.zeros((n, 2))
        X[np.arange(n), labels] = 1.0
        edges = [rng.choice(n, size=3, replace=False).tolist() for _ in range(8)]
        split = np.array(["train"] * 24 + ["val"] * 6)
        G = hypergraph_from_hyperedges(edges, n, features=X, labels=labels,
                                       split=split)
        m = hg.model_for_graph(G, num_layers=2, hidden_dim=8, seed=0)
        res = hg.train(m, G, hg.TrainConfig(epochs=300, learning_rate=0.01))
        assert res.train_acc >= 0.95

    def test_missing_labels(self):
        G = hypergraph_from_hyperedges([[0, 1]], 2)
        with pytest.raises(MissingLabels):
            hg.train(hg.init_model(1, 2), G, hg.TrainConfig(epochs=1))

    def test_deterministic(self, graph):
        cfg = hg.TrainConfig(epochs=20)
        a = hg.train(hg.model_for_graph(graph, seed=3), graph, cfg)
        b = hg.train(hg.model_for_graph(graph, seed=3), graph, cfg)
        for k in a.model.params:
            assert np.array_equal(a.model.params[k], b.model.params[k])

    def test_loss_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        G = small_graph(rng, num_nodes=6, num_edges=3, d=2)
        assert G.num_links <= 12
        m = hg.model_for_graph(G, num_layers=2, hidden_dim=3, seed=0)
        # random weights keep relu units off their kinks almost surely
        names = list(m.params)
        values = [rng.normal(size=m.params[k].shape) * 0.4 for k in names]
        cg = hg.CompiledGraph.from_hypergraph(G)
        train_idx = G.train_indices
        onehot = np.zeros((train_idx.size, m.num_classes))
        onehot[np.arange(train_idx.size), G.labels[train_idx]] = 1.0

        def program(*weights):
            params = dict(zip(names, weights))
            _, logits, _ = hg.forward_states(m, cg, cg.full_mask(), params=params)
            return ad.cross_entropy_from_logits(
                ad.gather_rows(logits, train_idx), onehot)

        assert ad.finite_difference_check(program, values, epsilon=1e-5) <= 1e-4


class TestEmbeddings:
    def test_shape_and_determinism(self, graph, model):
        Z = hg.node_embeddings(model, graph)
        assert Z.shape == (graph.num_nodes, model.hidden_dim)
        assert np.array_equal(Z, hg.node_embeddings(model, graph))


class TestCheckpoint:
    def test_bit_exact_round_trip(self, graph, model, tmp_path):
        hg.save_checkpoint(model, tmp_path / "ckpt", meta={"seed": 1})
        loaded = hg.load_checkpoint(tmp_path / "ckpt")
        assert loaded.aggregation == model.aggregation
        assert loaded.num_layers == model.num_layers
        for k, v in model.params.items():
            assert loaded.params[k].tobytes() == v.tobytes()
        assert np.array_equal(hg.forward(loaded, graph), hg.forward(model, graph))
