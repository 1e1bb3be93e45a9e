"""Message-passing hyperGNN with per-link masking.

Each layer runs two stages over the incidence links: hyperedge states are
an aggregation of member node states pushed through a one-hidden-layer
relu perceptron, then node states are updated from their own state plus an
aggregation of incident hyperedge states through a second perceptron.
Aggregation is a masked sum, or a masked segment-softmax weighted sum for
the attention variant (the mask multiplies inside the softmax
normalization, so masking a link is exactly equivalent to deleting it; the
weights are rescaled by the kept-link count so uniform attention reduces
to the plain sum and degree information survives identical inputs).

A link's mask value scales its message in both directions; the all-zero
mask therefore reduces every node update to its self term, giving a
features-only prediction. Because the ops in shypx.autodiff run plain when
no argument is a Tensor, the same forward serves evaluation, training
(weights on tape), and explanation (mask on tape).

Checkpoints are a directory holding manifest.json plus weights.bin, the
parameter arrays concatenated as little-endian float64 in manifest order;
round trips are bit exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from shypx import autodiff as ad
from shypx.hypergraph import Hypergraph, MissingLabels
from shypx.optim import Adam

SUM = "sum"
ATTENTION = "attention"


class NotAnAttentionModel(Exception):
    """Attention weights requested from a sum-aggregation model."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 500
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    # smoothing bounds the trained logit scale, which keeps KL-based
    # explanation losses well conditioned; 0 recovers plain one-hot targets
    label_smoothing: float = 0.1


@dataclass
class HyperGNNModel:
    num_layers: int
    hidden_dim: int
    feature_dim: int
    num_classes: int
    aggregation: str
    params: dict[str, np.ndarray]

    def copy(self) -> "HyperGNNModel":
        return HyperGNNModel(
            self.num_layers, self.hidden_dim, self.feature_dim,
            self.num_classes, self.aggregation,
            {k: v.copy() for k, v in self.params.items()},
        )


def _glorot(rng, fan_in, fan_out, shape):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_model(
    feature_dim: int,
    num_classes: int,
    num_layers: int = 3,
    hidden_dim: int = 16,
    aggregation: str = SUM,
    seed: int = 0,
    mean_edge_degree: float = 1.0,
    mean_node_degree: float = 1.0,
) -> HyperGNNModel:
    """Glorot-initialized model with the classifier at zero.

    Sum aggregation multiplies activation scale by the segment sizes, so
    the weights consuming aggregated messages are shrunk by the square root
    of the mean hyperedge / node degree (pass the hints or use
    model_for_graph). The zero classifier makes the initial loss exactly
    log(num_classes) instead of a saturated-softmax start.
    """
    if aggregation not in (SUM, ATTENTION):
        raise ValueError(f"unknown aggregation {aggregation!r}")
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    d_in = feature_dim
    h = hidden_dim
    for i in range(num_layers):
        params[f"l{i}.edge_w1"] = _glorot(rng, d_in, h, (d_in, h)) / np.sqrt(mean_edge_degree)
        params[f"l{i}.edge_b1"] = np.zeros(h)
        params[f"l{i}.edge_w2"] = _glorot(rng, h, h, (h, h))
        params[f"l{i}.edge_b2"] = np.zeros(h)
        params[f"l{i}.node_wself"] = _glorot(rng, d_in, h, (d_in, h))
        params[f"l{i}.node_wmsg"] = _glorot(rng, h, h, (h, h)) / np.sqrt(mean_node_degree)
        params[f"l{i}.node_b1"] = np.zeros(h)
        params[f"l{i}.node_w2"] = _glorot(rng, h, h, (h, h))
        params[f"l{i}.node_b2"] = np.zeros(h)
        if aggregation == ATTENTION:
            params[f"l{i}.att_node"] = _glorot(rng, d_in, 1, (d_in,))
            params[f"l{i}.att_edge"] = _glorot(rng, h, 1, (h,))
        d_in = h
    params["cls_w"] = np.zeros((h, num_classes))
    params["cls_b"] = np.zeros(num_classes)
    return HyperGNNModel(num_layers, hidden_dim, feature_dim, num_classes,
                         aggregation, params)


def model_for_graph(G: Hypergraph, num_layers: int = 3, hidden_dim: int = 16,
                    aggregation: str = SUM, seed: int = 0,
                    num_classes: int | None = None) -> HyperGNNModel:
    """init_model with degree hints computed from the graph."""
    links = max(G.num_links, 1)
    if num_classes is None:
        num_classes = G.num_classes
    return init_model(
        G.feature_dim, num_classes, num_layers, hidden_dim, aggregation, seed,
        mean_edge_degree=links / max(G.num_hyperedges, 1),
        mean_node_degree=links / max(G.num_nodes, 1),
    )


class CompiledGraph:
    """Per-graph segment maps reused across forward passes."""

    def __init__(self, num_nodes: int, num_edges: int, link_nodes, link_edges,
                 features: np.ndarray):
        self.num_nodes = num_nodes
        self.num_edges = num_edges
        self.link_nodes = np.asarray(link_nodes, dtype=np.int64)
        self.link_edges = np.asarray(link_edges, dtype=np.int64)
        self.features = np.asarray(features, dtype=np.float64)
        self.by_node = ad.SegmentMap(self.link_nodes, num_nodes)
        self.by_edge = ad.SegmentMap(self.link_edges, num_edges)

    @property
    def num_links(self) -> int:
        return int(self.link_nodes.size)

    @classmethod
    def from_hypergraph(cls, G: Hypergraph, features=None) -> "CompiledGraph":
        X = G.features if features is None else features
        return cls(G.num_nodes, G.num_hyperedges, G.link_nodes, G.link_edges, X)

    def full_mask(self) -> np.ndarray:
        return np.ones(self.num_links)


def compile_subhypergraph(sub):
    """CompiledGraph over a subhypergraph's own nodes and hyperedges.

    Node and hyperedge ids are compacted in ascending parent order, which
    preserves the relative link order, so masked evaluation on the parent
    and plain evaluation on the compiled rebuild agree bit for bit.
    Returns (compiled graph, parent node id -> local id map).
    """
    G = sub.parent
    nodes = sub.node_ids()
    node_map = {int(v): i for i, v in enumerate(nodes)}
    edge_map = {int(e): i for i, e in enumerate(sub.hyperedge_ids())}
    link_nodes = [node_map[int(G.link_nodes[i])] for i in sub.kept_links]
    link_edges = [edge_map[int(G.link_edges[i])] for i in sub.kept_links]
    cg = CompiledGraph(len(nodes), len(edge_map), link_nodes, link_edges,
                       G.features[nodes])
    return cg, node_map


def _mlp(x, w1, b1, w2, b2):
    return ad.add(ad.matmul(ad.relu(ad.add(ad.matmul(x, w1), b1)), w2), b2)


def forward_states(model: HyperGNNModel, cg: CompiledGraph, mask, X=None,
                   params=None, collect_attention: bool = False):
    """Run all layers; returns (final node states, logits, attention list).

    mask may be an ndarray or a Tensor; params ditto (defaults to the
    model's arrays). Attention arrays, when collected, are per layer and
    direction, aligned with the link order.
    """
    p = model.params if params is None else params
    z = cg.features if X is None else X
    attn_records = []

    def attention_sum(x_link, score_vec, seg):
        # softmax within the segment (mask inside the normalization), then
        # rescaled by the kept-link count so total mass matches the masked
        # sum; uniform scores reduce exactly to sum aggregation
        attn = ad.segment_softmax(ad.matmul(x_link, score_vec), seg, weights=mask)
        if collect_attention:
            attn_records.append(ad.value_of(attn))
        counts = ad.segment_take(ad.segment_sum(mask, seg), seg)
        return ad.segment_sum(ad.scale_rows(x_link, ad.mul(attn, counts)), seg)

    for i in range(model.num_layers):
        z_link = ad.segment_take(z, cg.by_node)
        if model.aggregation == ATTENTION:
            edge_in = attention_sum(z_link, p[f"l{i}.att_node"], cg.by_edge)
        else:
            edge_in = ad.segment_sum(ad.scale_rows(z_link, mask), cg.by_edge)
        h = _mlp(edge_in, p[f"l{i}.edge_w1"], p[f"l{i}.edge_b1"],
                 p[f"l{i}.edge_w2"], p[f"l{i}.edge_b2"])

        h_link = ad.segment_take(h, cg.by_edge)
        if model.aggregation == ATTENTION:
            msg = attention_sum(h_link, p[f"l{i}.att_edge"], cg.by_node)
        else:
            msg = ad.segment_sum(ad.scale_rows(h_link, mask), cg.by_node)
        pre = ad.add(ad.add(ad.matmul(z, p[f"l{i}.node_wself"]),
                            ad.matmul(msg, p[f"l{i}.node_wmsg"])),
                     p[f"l{i}.node_b1"])
        z = ad.add(ad.matmul(ad.relu(pre), p[f"l{i}.node_w2"]), p[f"l{i}.node_b2"])
    logits = ad.add(ad.matmul(z, p["cls_w"]), p["cls_b"])
    return z, logits, attn_records


def forward(model: HyperGNNModel, G: Hypergraph | CompiledGraph, mask=None,
            X=None) -> np.ndarray:
    """Per-node class probabilities under a link mask (default: all ones)."""
    cg = G if isinstance(G, CompiledGraph) else CompiledGraph.from_hypergraph(G)
    if mask is None:
        mask = cg.full_mask()
    _, logits, _ = forward_states(model, cg, mask, X=X)
    return ad.softmax(ad.value_of(logits))


def node_embeddings(model: HyperGNNModel, G: Hypergraph | CompiledGraph,
                    X=None) -> np.ndarray:
    """Final-layer pre-classifier node states under the full mask."""
    cg = G if isinstance(G, CompiledGraph) else CompiledGraph.from_hypergraph(G)
    z, _, _ = forward_states(model, cg, cg.full_mask(), X=X)
    return ad.value_of(z)


def attention_weights(model: HyperGNNModel, G: Hypergraph | CompiledGraph,
                      X=None) -> np.ndarray:
    """Mean per-link attention over all layers and both directions."""
    if model.aggregation != ATTENTION:
        raise NotAnAttentionModel("model uses sum aggregation")
    cg = G if isinstance(G, CompiledGraph) else CompiledGraph.from_hypergraph(G)
    _, _, attns = forward_states(model, cg, cg.full_mask(), X=X,
                                 collect_attention=True)
    return np.mean(attns, axis=0)


def predictions(model: HyperGNNModel, G, mask=None, X=None) -> np.ndarray:
    """Predicted class per node; argmax breaks ties toward the lowest id."""
    return forward(model, G, mask=mask, X=X).argmax(axis=1)


def accuracy(pred: np.ndarray, labels: np.ndarray, idx) -> float:
    return float((pred[idx] == labels[idx]).mean())


@dataclass
class TrainResult:
    model: HyperGNNModel
    train_acc: float
    val_acc: float
    loss_trace: np.ndarray = field(default_factory=lambda: np.empty(0))


def train(model_init: HyperGNNModel, G: Hypergraph, config: TrainConfig,
          mask=None) -> TrainResult:
    """Full-batch Adam on mean cross-entropy over the train nodes.

    The input model is not mutated. mask defaults to all ones; passing a
    zero mask trains the structure-blind control.
    """
    if G.labels is None or G.split is None:
        raise MissingLabels("training requires labels and a train/val split")
    model = model_init.copy()
    cg = CompiledGraph.from_hypergraph(G)
    mask = cg.full_mask() if mask is None else np.asarray(mask, dtype=np.float64)
    train_idx = G.train_indices
    alpha = config.label_smoothing
    onehot = np.full((train_idx.size, model.num_classes),
                     alpha / model.num_classes)
    onehot[np.arange(train_idx.size), G.labels[train_idx]] += 1.0 - alpha

    opt = Adam(model.params, config.learning_rate, config.beta1, config.beta2,
               config.eps)
    losses = np.empty(config.epochs)
    names = list(model.params)
    for epoch in range(config.epochs):
        tape = ad.Tape()
        wt = {k: tape.input(v) for k, v in model.params.items()}
        _, logits, _ = forward_states(model, cg, mask, params=wt)
        loss = ad.cross_entropy_from_logits(ad.gather_rows(logits, train_idx), onehot)
        grads = ad.backward(loss, [wt[k] for k in names])
        opt.step(dict(zip(names, grads)))
        losses[epoch] = float(loss.value)

    pred = predictions(model, cg, mask=mask)
    return TrainResult(
        model=model,
        train_acc=accuracy(pred, G.labels, train_idx),
        val_acc=accuracy(pred, G.labels, G.val_indices),
        loss_trace=losses,
    )


# ------------------------------------------------------------- checkpoint io


def save_checkpoint(model: HyperGNNModel, path, meta: dict | None = None) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    names = sorted(model.params)
    manifest = {
        "kind": "hypergnn-checkpoint",
        "version": 1,
        "num_layers": model.num_layers,
        "hidden_dim": model.hidden_dim,
        "feature_dim": model.feature_dim,
        "num_classes": model.num_classes,
        "aggregation": model.aggregation,
        "params": [{"name": k, "shape": list(model.params[k].shape)} for k in names],
        "meta": meta or {},
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2))
    blob = b"".join(np.ascontiguousarray(model.params[k], dtype="<f8").tobytes()
                    for k in names)
    (path / "weights.bin").write_bytes(blob)


def load_checkpoint(path) -> HyperGNNModel:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    raw = np.frombuffer((path / "weights.bin").read_bytes(), dtype="<f8")
    params = {}
    offset = 0
    for entry in manifest["params"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        params[entry["name"]] = raw[offset:offset + size].reshape(shape).copy()
        offset += size
    return HyperGNNModel(
        num_layers=manifest["num_layers"],
        hidden_dim=manifest["hidden_dim"],
        feature_dim=manifest["feature_dim"],
        num_classes=manifest["num_classes"],
        aggregation=manifest["aggregation"],
        params=params,
    )
