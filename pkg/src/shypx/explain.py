"""Instance-level explanations by discrete subhypergraph sampling.

The explainer optimizes one sampling probability per link of the focus
node's receptive field, scoring candidate subhypergraphs by a faithfulness
term (KL divergence of the masked prediction against the receptive-field
prediction) plus a size penalty. Three samplers are provided:

* gumbel: binary Gumbel-Softmax per link with a straight-through hard
  sample; the forward pass always sees a discrete subhypergraph, the
  gradient flows through the soft relaxation. The best hard-mask loss seen
  across epochs is snapshotted and its mask returned.
* relax_thresh: continuous sigmoid masks with a binary-entropy penalty,
  binarized at a threshold after optimization.
* sparsemax: per-link two-class simplex projection of (logit, 0), used as a
  continuous mask like relax_thresh (the projection value is
  clip((logit + 1) / 2, 0, 1)), with the same entropy penalty and final
  thresholding.

Post-processing keeps only the connected component around the explained
node; disconnected fragments cannot influence its prediction, so this
never changes the faithfulness term.

Per-instance randomness comes from SeedSequence([config.seed, node]), so
explanations are reproducible independently of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from shypx import autodiff as ad
from shypx import hypergnn as hg
from shypx.hypergraph import (
    Hypergraph,
    Subhypergraph,
    computational_subhypergraph,
    connected_component,
)
from shypx.optim import Adam

GUMBEL = "gumbel"
RELAX_THRESH = "relax_thresh"
SPARSEMAX = "sparsemax"
SAMPLERS = (GUMBEL, RELAX_THRESH, SPARSEMAX)


class NotADistribution(Exception):
    pass


@dataclass
class ExplainConfig:
    lambda_pred: float = 1.0
    lambda_size: float = 0.05
    epochs: int = 800
    learning_rate: float = 0.01
    temperature: float = 1.0
    init_prob: float = 0.95
    sampler: str = GUMBEL
    seed: int = 0
    entropy_weight: float = 0.1  # relax_thresh / sparsemax only
    threshold: float = 0.5       # relax_thresh / sparsemax only

    def __post_init__(self):
        if self.lambda_pred < 0 or self.lambda_size < 0:
            raise ValueError("lambda coefficients must be nonnegative")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if not 0 < self.init_prob < 1:
            raise ValueError("init_prob must lie in (0, 1)")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")

    def to_json_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "lambda_pred", "lambda_size", "epochs", "learning_rate",
            "temperature", "init_prob", "sampler", "seed",
            "entropy_weight", "threshold")}

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExplainConfig":
        return cls(**d)


@dataclass(frozen=True)
class LinkDistribution:
    """Independent keep-probabilities over the links of a receptive field.

    pi = sigmoid(logits) on the kept links of `comp`; exactly 0 elsewhere.
    """

    comp: Subhypergraph
    logits: np.ndarray  # aligned with comp.kept_links

    def probabilities(self) -> np.ndarray:
        """Full parent-length vector of keep-probabilities."""
        pi = np.zeros(self.comp.parent.num_links)
        pi[self.comp.kept_links] = ad.sigmoid(self.logits)
        return pi


@dataclass
class ExplanationRecord:
    node: int
    explanation: Subhypergraph
    best_loss: float
    loss_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    sampled_mask: np.ndarray = field(default_factory=lambda: np.empty(0))
    method: str = "shypx"


def _check_distribution(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or (p < 0).any() or abs(p.sum() - 1.0) > 1e-6:
        raise NotADistribution(f"{name} is not a probability vector")
    return p


def explanation_loss(p_sub, p_comp, sub_size: float,
                     lambda_pred: float, lambda_size: float) -> float:
    """lambda_pred * KL(p_sub || p_comp) + lambda_size * sub_size.

    Probabilities are clamped at 1e-12 inside the logs; sub_size may be a
    relaxed (real-valued) link count.
    """
    p = _check_distribution(p_sub, "p_sub")
    q = _check_distribution(p_comp, "p_comp")
    if p.shape != q.shape:
        raise NotADistribution("class counts differ")
    logs = np.log(np.maximum(p, 1e-12)) - np.log(np.maximum(q, 1e-12))
    return float(lambda_pred * (p * logs).sum() + lambda_size * sub_size)


def sample_gumbel(distribution: LinkDistribution, temperature: float,
                  rng: np.random.Generator):
    """Draw one subhypergraph: per link a binary Gumbel-Softmax over
    {keep, drop} with class logits (logit, 0). Returns (hard, soft) masks
    over the parent's links; links outside the receptive field are 0."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    kept = distribution.comp.kept_links
    u = rng.random((kept.size, 2))
    g = -np.log(-np.log(np.clip(u, 1e-12, 1.0)))
    soft_local = ad.sigmoid((distribution.logits + g[:, 0] - g[:, 1]) / temperature)
    L = distribution.comp.parent.num_links
    soft = np.zeros(L)
    hard = np.zeros(L)
    soft[kept] = soft_local
    hard[kept] = soft_local > 0.5
    return hard, soft


def sparsemax(z) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort + threshold)."""
    z = np.asarray(z, dtype=np.float64)
    s = np.sort(z)[::-1]
    cumulative = np.cumsum(s) - 1.0
    k = np.arange(1, z.size + 1)
    support = s - cumulative / k > 0
    tau = cumulative[support][-1] / k[support][-1]
    return np.maximum(z - tau, 0.0)


def _instance_rng(config: ExplainConfig, node: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([config.seed, node]))


def _binary_entropy_sum(p):
    """sum of per-entry binary entropies, as tape ops (zero at 0/1)."""
    one_minus = ad.add_scalar(ad.scale(p, -1.0), 1.0)
    h = ad.add(ad.mul(p, ad.log(ad.clamp(p, 1e-12, 1.0))),
               ad.mul(one_minus, ad.log(ad.clamp(one_minus, 1e-12, 1.0))))
    return ad.scale(ad.sum_all(h), -1.0)


def _hard_loss(model, cg, focus, mask, p_comp, config) -> float:
    """Exact loss of a discrete mask: KL of the hard forward + size term."""
    _, logits, _ = hg.forward_states(model, cg, mask)
    kl = float(ad.kl_from_logits(ad.value_of(logits)[focus], p_comp))
    return config.lambda_pred * kl + config.lambda_size * float(mask.sum())


def explain_instance(model: hg.HyperGNNModel, G: Hypergraph, v: int,
                     config: ExplainConfig) -> ExplanationRecord:
    """Optimize a link distribution over the receptive field of v and return
    the best discrete subhypergraph found, post-processed to the connected
    component containing v."""
    comp = computational_subhypergraph(G, v, model.num_layers)
    if comp.size == 0:
        return ExplanationRecord(node=v, explanation=comp, best_loss=0.0,
                                 sampled_mask=np.zeros(G.num_links))

    cg, node_map = hg.compile_subhypergraph(comp)
    focus = node_map[v]
    p_comp = hg.forward(model, cg)[focus]
    rng = _instance_rng(config, v)

    n = cg.num_links
    # keep-probability starts at init_prob under each sampler's own map
    if config.sampler == SPARSEMAX:
        init_logit = 2.0 * config.init_prob - 1.0
    else:
        init_logit = np.log(config.init_prob / (1.0 - config.init_prob))
    logits = np.full(n, init_logit)
    opt = Adam({"logits": logits}, config.learning_rate)

    best_loss = np.inf
    best_mask = np.ones(n)
    trace = np.empty(config.epochs)

    for epoch in range(config.epochs):
        tape = ad.Tape()
        lt = tape.input(logits)
        if config.sampler == GUMBEL:
            u = rng.random((n, 2))
            g = -np.log(-np.log(np.clip(u, 1e-12, 1.0)))
            noisy = ad.scale(ad.add(lt, g[:, 0] - g[:, 1]), 1.0 / config.temperature)
            soft = ad.sigmoid(noisy)
            mask_t = ad.hard_threshold(soft)
        elif config.sampler == RELAX_THRESH:
            soft = ad.sigmoid(lt)
            mask_t = soft
        else:  # SPARSEMAX: keep-probability of projecting (logit, 0)
            soft = ad.clamp(ad.scale(ad.add_scalar(lt, 1.0), 0.5), 0.0, 1.0)
            mask_t = soft

        _, logits_all, _ = hg.forward_states(model, cg, mask_t)
        kl = ad.kl_from_logits(ad.row(logits_all, focus), p_comp)
        loss = ad.add(ad.scale(kl, config.lambda_pred),
                      ad.scale(ad.sum_all(soft), config.lambda_size))
        if config.sampler != GUMBEL and config.entropy_weight:
            loss = ad.add(loss, ad.scale(_binary_entropy_sum(soft),
                                         config.entropy_weight))
        (grad,) = ad.backward(loss, [lt])
        opt.step({"logits": grad})

        if config.sampler == GUMBEL:
            # forward already used the hard mask, so its KL is the hard KL
            hard = ad.value_of(mask_t)
            hard_loss = (config.lambda_pred * float(kl.value)
                         + config.lambda_size * float(hard.sum()))
            trace[epoch] = hard_loss
            if hard_loss < best_loss:
                best_loss = hard_loss
                best_mask = hard.copy()
        else:
            trace[epoch] = float(loss.value)

    if config.sampler != GUMBEL:
        best_mask = (ad.sigmoid(logits) > config.threshold).astype(np.float64)
        if config.sampler == SPARSEMAX:
            best_mask = (np.clip((logits + 1.0) / 2.0, 0, 1) > config.threshold
                         ).astype(np.float64)
        best_loss = _hard_loss(model, cg, focus, best_mask, p_comp, config)

    kept_parent = comp.kept_links[np.flatnonzero(best_mask)]
    raw = Subhypergraph(G, kept_parent, v)
    explanation = connected_component(raw, v)
    sampled_mask = np.zeros(G.num_links)
    sampled_mask[kept_parent] = 1.0
    return ExplanationRecord(node=v, explanation=explanation,
                             best_loss=float(best_loss), loss_trace=trace,
                             sampled_mask=sampled_mask)


def relax_and_thresh(model: hg.HyperGNNModel, G: Hypergraph, v: int,
                     config: ExplainConfig) -> ExplanationRecord:
    """Continuous-mask variant: sigmoid masks in the forward pass, entropy
    penalty, binarization at config.threshold after optimization."""
    return explain_instance(model, G, v, replace(config, sampler=RELAX_THRESH))


def record_to_json_dict(rec: ExplanationRecord, metrics: dict | None = None) -> dict:
    d = {
        "node": rec.node,
        "method": rec.method,
        "kept_links": rec.explanation.kept_links.tolist(),
        "best_loss": rec.best_loss,
        "loss_trace": np.asarray(rec.loss_trace).tolist(),
        "sampled_mask_links": np.flatnonzero(rec.sampled_mask).tolist(),
    }
    if metrics is not None:
        d["metrics"] = metrics
    return d


def record_from_json_dict(d: dict, G: Hypergraph) -> ExplanationRecord:
    mask = np.zeros(G.num_links)
    mask[np.asarray(d.get("sampled_mask_links", []), dtype=np.int64)] = 1.0
    return ExplanationRecord(
        node=int(d["node"]),
        explanation=Subhypergraph(G, np.asarray(d["kept_links"], dtype=np.int64),
                                  int(d["node"])),
        best_loss=float(d["best_loss"]),
        loss_trace=np.asarray(d.get("loss_trace", [])),
        sampled_mask=mask,
        method=d.get("method", "shypx"),
    )
