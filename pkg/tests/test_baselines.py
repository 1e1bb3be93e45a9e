"""Random / Gradient / Attention baselines."""

import numpy as np
import pytest

from helpers import labeled_toy_graph, trained_toy_model
from shypx import autodiff as ad
from shypx import hypergnn as hg
from shypx.baselines import (
    BaselineConfig,
    attention_baseline,
    baseline_explanations,
    gradient_baseline,
    random_baseline,
)
from shypx.hypergraph import (
    computational_subhypergraph,
    connected_component,
    hypergraph_from_hyperedges,
)


@pytest.fixture(scope="module")
def setup():
    G = labeled_toy_graph(seed=2)
    model = trained_toy_model(G, seed=0)
    return G, model


@pytest.fixture(scope="module")
def attention_setup():
    G = labeled_toy_graph(seed=2)
    model = trained_toy_model(G, aggregation="attention", seed=0)
    return G, model


class TestRandom:
    def test_n_zero_is_trivial(self, setup):
        G, _ = setup
        comp = computational_subhypergraph(G, 0, 2)
        sub = random_baseline(comp, 0, np.random.default_rng(0))
        assert sub.size == 0
        assert sub.focus_node == 0

    def test_same_seed_same_selection(self, setup):
        G, _ = setup
        comp = computational_subhypergraph(G, 1, 2)
        a = random_baseline(comp, 4, np.random.default_rng(9))
        b = random_baseline(comp, 4, np.random.default_rng(9))
        assert np.array_equal(a.kept_links, b.kept_links)

    def test_retained_size_at_most_n(self, setup):
        G, _ = setup
        rng = np.random.default_rng(0)
        for v in range(8):
            comp = computational_subhypergraph(G, v, 2)
            sub = random_baseline(comp, 5, rng)
            assert sub.size <= 5

    def test_connected_or_trivial(self, setup):
        G, _ = setup
        rng = np.random.default_rng(1)
        for v in range(8):
            comp = computational_subhypergraph(G, v, 2)
            sub = random_baseline(comp, 3, rng)
            again = connected_component(sub, v)
            assert np.array_equal(again.kept_links, sub.kept_links)


class TestGradient:
    def test_gradient_vanishes_outside_receptive_field(self, setup):
        G, model = setup
        v = int(G.link_nodes[0])
        comp = computational_subhypergraph(G, v, model.num_layers)
        cg = hg.CompiledGraph.from_hypergraph(G)
        tape = ad.Tape()
        mask = tape.input(np.ones(G.num_links))
        _, logits, _ = hg.forward_states(model, cg, mask)
        c = int(ad.value_of(logits)[v].argmax())
        onehot = np.zeros(model.num_classes)
        onehot[c] = 1.0
        target = ad.sum_all(ad.mul(ad.row(logits, v), onehot))
        (grad,) = ad.backward(target, [mask])
        outside = np.setdiff1d(np.arange(G.num_links), comp.kept_links)
        assert np.abs(grad[outside]).max() == 0.0

    def test_hand_computed_ranking_single_layer(self):
        # hyperedge {a, b}; phi passes the masked sum, node update passes the
        # message; logit_a = w * (m_a x_a + m_b x_b) * m_a
        G = hypergraph_from_hyperedges([[0, 1]], 2,
                                       features=np.array([[0.5], [2.0]]))
        m = hg.init_model(1, 2, num_layers=1, hidden_dim=1)
        p = m.params
        p["l0.edge_w1"][:] = 1.0
        p["l0.edge_w2"][:] = 1.0
        p["l0.node_wself"][:] = 0.0
        p["l0.node_wmsg"][:] = 1.0
        p["l0.node_w2"][:] = 1.0
        p["cls_w"][:] = np.array([[1.0, 0.0]])
        cg = hg.CompiledGraph.from_hypergraph(G)
        tape = ad.Tape()
        mask = tape.input(np.ones(2))
        _, logits, _ = hg.forward_states(m, cg, mask)
        target = ad.sum_all(ad.mul(ad.row(logits, 0), np.array([1.0, 0.0])))
        (grad,) = ad.backward(target, [mask])
        x_a, x_b = 0.5, 2.0
        # d logit_a / d m_a = (x_a + x_b) + x_a (product rule through both
        # stages); d logit_a / d m_b = x_b
        assert grad[0] == pytest.approx((x_a + x_b) + x_a)
        assert grad[1] == pytest.approx(x_b)

    def test_explanation_contract(self, setup):
        G, model = setup
        for v in range(6):
            sub = gradient_baseline(model, G, v, 4)
            comp = computational_subhypergraph(G, v, model.num_layers)
            assert comp.contains(sub)
            assert sub.size <= 4
            again = connected_component(sub, v)
            assert np.array_equal(again.kept_links, sub.kept_links)


class TestAttention:
    def test_requires_attention_model(self, setup):
        G, model = setup
        with pytest.raises(hg.NotAnAttentionModel):
            attention_baseline(model, G, 0, 5)

    def test_saturation_keeps_all_nonzero(self, attention_setup):
        G, model = attention_setup
        v = int(G.link_nodes[0])
        comp = computational_subhypergraph(G, v, model.num_layers)
        weights = hg.attention_weights(model, G)[comp.kept_links]
        sub = attention_baseline(model, G, v, comp.size + 10)
        want = connected_component(
            type(comp)(G, comp.kept_links[weights > 0], v), v)
        assert np.array_equal(sub.kept_links, want.kept_links)

    def test_singleton_edge_link_outranks(self):
        # a singleton hyperedge gets node->edge attention exactly 1; every
        # link of the 3-member hyperedge gets at most ~1/2 there
        G = hypergraph_from_hyperedges([[0], [0, 1, 2]], 3,
                                       features=np.ones((3, 2)))
        m = hg.model_for_graph(G, num_layers=1, aggregation="attention",
                               seed=0, num_classes=2)
        w = hg.attention_weights(m, G)
        assert w[0] == w.max()

    def test_explanation_contract(self, attention_setup):
        G, model = attention_setup
        records = baseline_explanations(
            model, G, range(6), BaselineConfig(n=4, method="attention"))
        for rec in records:
            comp = computational_subhypergraph(G, rec.node, model.num_layers)
            assert comp.contains(rec.explanation)
            assert rec.explanation.size <= 4


class TestRecords:
    def test_methods_tagged_and_ordered(self, setup):
        G, model = setup
        records = baseline_explanations(model, G, [5, 1, 3],
                                        BaselineConfig(n=3, method="random", seed=0))
        assert [r.node for r in records] == [1, 3, 5]
        assert all(r.method == "random" for r in records)

    def test_random_records_deterministic_per_node(self, setup):
        G, model = setup
        cfg = BaselineConfig(n=3, method="random", seed=4)
        a = baseline_explanations(model, G, [2, 6], cfg)
        b = baseline_explanations(model, G, [6, 2], cfg)
        assert np.array_equal(a[0].explanation.kept_links,
                              b[0].explanation.kept_links)
