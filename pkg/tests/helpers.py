"""Shared test utilities: random differentiable programs and tiny graphs."""

import numpy as np

from shypx import autodiff as ad


def random_program(seed: int):
    """Build a random scalar program over the supported op set.

    Returns (program, inputs). Programs chain unary and binary ops over a
    few matrices plus segment ops, ending in a scalar reduction. Values are
    kept at unit scale so exp/log stay well conditioned.
    """
    rng = np.random.default_rng(seed)
    L, d = int(rng.integers(4, 9)), int(rng.integers(2, 4))
    num_segments = int(rng.integers(2, 4))
    ids = rng.integers(0, num_segments, size=L)
    seg = ad.SegmentMap(ids, num_segments)
    w = rng.normal(size=(d, d))
    ref = rng.dirichlet(np.ones(d))
    steps = [rng.integers(0, 9) for _ in range(int(rng.integers(2, 6)))]

    def program(x, s):
        h = x
        for op in steps:
            if op == 0:
                h = ad.matmul(h, w)
            elif op == 1:
                h = ad.add(h, x)
            elif op == 2:
                h = ad.mul(h, x)
            elif op == 3:
                h = ad.relu(h)
            elif op == 4:
                h = ad.sigmoid(h)
            elif op == 5:
                h = ad.scale_rows(h, s)
            elif op == 6:
                h = ad.segment_take(ad.segment_sum(h, seg), seg)
            elif op == 7:
                h = ad.exp(ad.clamp(h, -2.0, 2.0))
            elif op == 8:
                h = ad.log(ad.add_scalar(ad.sigmoid(h), 0.5))
        attn = ad.segment_softmax(ad.matmul(h, w[:, 0]), seg, weights=ad.sigmoid(s))
        h = ad.scale_rows(h, attn)
        pooled = ad.segment_sum(h, seg)
        kl = ad.kl_from_logits(ad.row(ad.matmul(pooled, w), 0), ref)
        return ad.add(kl, ad.mean_all(h))

    x = rng.normal(size=(L, d))
    s = rng.normal(size=L)
    return program, [x, s]


def max_fd_error_over_programs(num_programs: int, seed0: int = 0) -> float:
    worst = 0.0
    for i in range(num_programs):
        program, inputs = random_program(seed0 + i)
        worst = max(worst, ad.finite_difference_check(program, inputs, epsilon=1e-5))
    return worst


def labeled_toy_graph(seed: int = 0, num_nodes: int = 24, num_edges: int = 10):
    """Small labeled hypergraph whose labels follow a feature signal."""
    from shypx.hypergraph import hypergraph_from_hyperedges

    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=num_nodes)
    X = rng.normal(size=(num_nodes, 3)) * 0.3
    X[:, 0] += labels  # separable signal
    edges = [rng.choice(num_nodes, size=int(rng.integers(2, 5)), replace=False).tolist()
             for _ in range(num_edges)]
    n_train = int(0.8 * num_nodes)
    order = rng.permutation(num_nodes)
    split = np.empty(num_nodes, dtype="U5")
    split[order[:n_train]] = "train"
    split[order[n_train:]] = "val"
    return hypergraph_from_hyperedges(edges, num_nodes, features=X,
                                      labels=labels, split=split)


def trained_toy_model(G, aggregation="sum", seed: int = 0, epochs: int = 200):
    from shypx import hypergnn as hg

    model = hg.model_for_graph(G, num_layers=2, hidden_dim=8,
                               aggregation=aggregation, seed=seed)
    return hg.train(model, G, hg.TrainConfig(epochs=epochs,
                                             learning_rate=0.01)).model
