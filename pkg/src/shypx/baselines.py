"""Top-n link-attribution baselines: Random, Gradient, Attention.

Each method scores the links of the focus node's receptive field, keeps
the top n (ties broken by canonical link order), and applies the same
post-processing as the optimizing explainer: only the connected component
around the focus node is returned, so retained sizes are usually below n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shypx import autodiff as ad
from shypx import hypergnn as hg
from shypx.explain import ExplanationRecord
from shypx.hypergraph import (
    Hypergraph,
    Subhypergraph,
    computational_subhypergraph,
    connected_component,
)

RANDOM = "random"
GRADIENT = "gradient"
ATTENTION = "attention"
METHODS = (RANDOM, GRADIENT, ATTENTION)


@dataclass
class BaselineConfig:
    n: int = 10
    seed: int = 0
    method: str = RANDOM


def _top_n(comp: Subhypergraph, scores: np.ndarray, n: int) -> Subhypergraph:
    """Keep the n highest-scoring nonzero links of comp; stable ties."""
    keep = min(n, int(np.count_nonzero(scores)))
    if keep <= 0:
        return Subhypergraph(comp.parent, focus_node=comp.focus_node)
    order = np.argsort(-scores, kind="stable")[:keep]
    return Subhypergraph(comp.parent, comp.kept_links[order], comp.focus_node)


def _post_process(sub: Subhypergraph) -> Subhypergraph:
    return connected_component(sub, sub.focus_node)


def random_baseline(G_comp: Subhypergraph, n: int,
                    rng: np.random.Generator) -> Subhypergraph:
    """Score each receptive-field link with an independent U(0,1) draw."""
    scores = rng.random(G_comp.size) if G_comp.size else np.empty(0)
    # uniform draws are almost surely nonzero; no nonzero filter needed
    keep = min(n, G_comp.size)
    if keep <= 0:
        return Subhypergraph(G_comp.parent, focus_node=G_comp.focus_node)
    order = np.argsort(-scores, kind="stable")[:keep]
    picked = Subhypergraph(G_comp.parent, G_comp.kept_links[order],
                           G_comp.focus_node)
    return _post_process(picked)


def gradient_baseline(model: hg.HyperGNNModel, G: Hypergraph, v: int,
                      n: int) -> Subhypergraph:
    """Rank links by |d logit_c / d mask| at the all-ones mask, where c is
    the predicted class of v over its receptive field."""
    comp = computational_subhypergraph(G, v, model.num_layers)
    if comp.size == 0:
        return Subhypergraph(G, focus_node=v)
    cg, node_map = hg.compile_subhypergraph(comp)
    focus = node_map[v]
    tape = ad.Tape()
    mask = tape.input(np.ones(cg.num_links))
    _, logits, _ = hg.forward_states(model, cg, mask)
    focus_logits = ad.row(logits, focus)
    c = int(ad.value_of(focus_logits).argmax())
    onehot = np.zeros(model.num_classes)
    onehot[c] = 1.0
    target = ad.sum_all(ad.mul(focus_logits, onehot))
    (grad,) = ad.backward(target, [mask])
    return _post_process(_top_n(comp, np.abs(grad), n))


def attention_baseline(model: hg.HyperGNNModel, G: Hypergraph, v: int,
                       n: int) -> Subhypergraph:
    """Rank receptive-field links by the model's mean attention weight."""
    weights = hg.attention_weights(model, G)  # raises NotAnAttentionModel
    comp = computational_subhypergraph(G, v, model.num_layers)
    if comp.size == 0:
        return Subhypergraph(G, focus_node=v)
    return _post_process(_top_n(comp, weights[comp.kept_links], n))


def baseline_explanations(model, G, nodes, config: BaselineConfig,
                          attention_cache: np.ndarray | None = None,
                          ) -> list[ExplanationRecord]:
    """Run one baseline over a node list, wrapped as ExplanationRecords."""
    records = []
    if config.method == ATTENTION and attention_cache is None:
        attention_cache = hg.attention_weights(model, G)
    for v in sorted(int(x) for x in nodes):
        if config.method == RANDOM:
            rng = np.random.default_rng(np.random.SeedSequence([config.seed, v]))
            comp = computational_subhypergraph(G, v, model.num_layers)
            sub = random_baseline(comp, config.n, rng)
        elif config.method == GRADIENT:
            sub = gradient_baseline(model, G, v, config.n)
        elif config.method == ATTENTION:
            comp = computational_subhypergraph(G, v, model.num_layers)
            sub = (_post_process(_top_n(comp, attention_cache[comp.kept_links],
                                        config.n))
                   if comp.size else Subhypergraph(G, focus_node=v))
        else:
            raise ValueError(f"unknown baseline method {config.method!r}")
        records.append(ExplanationRecord(
            node=v, explanation=sub, best_loss=float("nan"),
            sampled_mask=sub.link_mask(), method=config.method))
    return records
