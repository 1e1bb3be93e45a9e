"""Generalized fidelity: similarity of masked predictions to the
receptive-field prediction, under four similarity functions.

Fid-(s) compares the prediction restricted to the explanation against the
prediction over the full receptive field G_comp; Fid+(s) does the same for
the explanation's complement within G_comp. Low Fid- means the explanation
is sufficient. The reference distribution is the model's output over
G_comp, which equals its output over the whole hypergraph by the
receptive-field property (asserted in tests).

Similarities (p = masked prediction, q = reference):
  KL    sum p log(p/q)            >= 0, 0 iff p = q
  TV    0.5 * sum |p - q|         in [0, 1]
  Xent  -sum p log q              reported positive so lower is better;
                                  equals the entropy of p when p = q
  Acc   1 if argmax p != argmax q else 0 (mismatch indicator)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shypx import hypergnn as hg
from shypx.explain import ExplanationRecord, NotADistribution
from shypx.hypergraph import Hypergraph, Subhypergraph, computational_subhypergraph

KINDS = ("acc", "kl", "tv", "xent")


class LengthMismatch(Exception):
    pass


class EmptyInput(Exception):
    pass


@dataclass
class FidelityReport:
    fid_minus: dict[str, float]
    fid_plus: dict[str, float]
    mean_size: float
    mean_density: float
    num_instances: int

    def as_row(self) -> dict[str, float]:
        row: dict[str, float] = {}
        for kind in KINDS:
            row[f"fid_minus_{kind}"] = self.fid_minus[kind]
        for kind in KINDS:
            row[f"fid_plus_{kind}"] = self.fid_plus[kind]
        row["size"] = self.mean_size
        row["density"] = self.mean_density
        row["num_instances"] = self.num_instances
        return row


def _validated(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise LengthMismatch(f"{p.shape} vs {q.shape}")
    for name, vec in (("p", p), ("q", q)):
        if vec.ndim != 1 or (vec < 0).any() or abs(vec.sum() - 1.0) > 1e-6:
            raise NotADistribution(f"{name} is not a probability vector")
    return p, q


def similarity(kind: str, p, q, clamp_at: float = 1e-12) -> float:
    p, q = _validated(p, q)
    logp = np.log(np.maximum(p, clamp_at))
    logq = np.log(np.maximum(q, clamp_at))
    if kind == "kl":
        return float((p * (logp - logq)).sum())
    if kind == "tv":
        return float(0.5 * np.abs(p - q).sum())
    if kind == "xent":
        return float(-(p * logq).sum())
    if kind == "acc":
        return float(int(p.argmax()) != int(q.argmax()))
    raise ValueError(f"unknown similarity kind {kind!r}")


@dataclass
class InstanceOutcome:
    """Per-instance predictions and concision, the raw material of a report."""

    node: int
    p_comp: np.ndarray
    p_expl: np.ndarray
    p_compl: np.ndarray
    size: int
    comp_size: int

    @property
    def density(self) -> float:
        return self.size / self.comp_size if self.comp_size else 0.0

    def similarities(self) -> dict[str, dict[str, float]]:
        return {
            "minus": {k: similarity(k, self.p_expl, self.p_comp) for k in KINDS},
            "plus": {k: similarity(k, self.p_compl, self.p_comp) for k in KINDS},
        }


def _local_mask(comp: Subhypergraph, expl: Subhypergraph, n_local: int):
    index_of = {int(pl): i for i, pl in enumerate(comp.kept_links)}
    mask = np.zeros(n_local)
    for pl in expl.kept_links:
        mask[index_of[int(pl)]] = 1.0
    return mask


def instance_outcome(model: hg.HyperGNNModel, G: Hypergraph,
                     rec: ExplanationRecord) -> InstanceOutcome:
    """Evaluate one explanation on the compiled receptive field of its node."""
    comp = computational_subhypergraph(G, rec.node, model.num_layers)
    if not comp.contains(rec.explanation):
        raise LengthMismatch(
            f"explanation of node {rec.node} leaves its receptive field")
    if comp.size == 0:
        p = hg.forward(model, hg.CompiledGraph(
            1, 0, [], [], G.features[[rec.node]]))[0]
        return InstanceOutcome(rec.node, p, p, p, 0, 0)
    cg, node_map = hg.compile_subhypergraph(comp)
    focus = node_map[rec.node]
    p_comp = hg.forward(model, cg)[focus]
    mask = _local_mask(comp, rec.explanation, cg.num_links)
    p_expl = hg.forward(model, cg, mask=mask)[focus]
    p_compl = hg.forward(model, cg, mask=1.0 - mask)[focus]
    return InstanceOutcome(rec.node, p_comp, p_expl, p_compl,
                           rec.explanation.size, comp.size)


def fidelity_minus(model, G, explanations, kind: str) -> float:
    """Mean s(prediction over G_expl, prediction over G_comp)."""
    outcomes = [instance_outcome(model, G, r) for r in explanations]
    return float(np.mean([similarity(kind, o.p_expl, o.p_comp) for o in outcomes]))


def fidelity_plus(model, G, explanations, kind: str) -> float:
    """Mean s(prediction over G_comp \\ G_expl, prediction over G_comp)."""
    outcomes = [instance_outcome(model, G, r) for r in explanations]
    return float(np.mean([similarity(kind, o.p_compl, o.p_comp) for o in outcomes]))


def evaluate_explanations(model, G, explanations) -> FidelityReport:
    """All eight fidelity numbers plus mean size and density."""
    outcomes = [instance_outcome(model, G, r) for r in explanations]
    return report_from_outcomes(outcomes)


def report_from_outcomes(outcomes: list[InstanceOutcome]) -> FidelityReport:
    if not outcomes:
        raise EmptyInput("no explanation instances to evaluate")
    sims = [o.similarities() for o in outcomes]
    return FidelityReport(
        fid_minus={k: float(np.mean([s["minus"][k] for s in sims])) for k in KINDS},
        fid_plus={k: float(np.mean([s["plus"][k] for s in sims])) for k in KINDS},
        mean_size=float(np.mean([o.size for o in outcomes])),
        mean_density=float(np.mean([o.density for o in outcomes])),
        num_instances=len(outcomes),
    )


def instance_metrics_json(outcomes: list[InstanceOutcome]) -> list[dict]:
    """Per-instance values for the full-detail JSON report."""
    rows = []
    for o in outcomes:
        sims = o.similarities()
        rows.append({
            "node": o.node,
            "size": o.size,
            "comp_size": o.comp_size,
            "density": o.density,
            "fid_minus": sims["minus"],
            "fid_plus": sims["plus"],
            "p_comp": o.p_comp.tolist(),
            "p_expl": o.p_expl.tolist(),
            "p_compl": o.p_compl.tolist(),
        })
    return rows
