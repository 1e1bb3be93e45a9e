"""Global explanations by concept extraction over latent activations.

Concepts are k-means clusters of the model's node embeddings. Each concept
is visualized through the local explanation of its representative node
(the member closest to the member mean), and concepts are grouped into
class-level explanations by majority vote over member labels. Concept
completeness measures how well concept membership alone predicts labels:
majority classes are fitted on train nodes and scored on val nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shypx.hypergraph import SPLIT_TRAIN, SPLIT_VAL


class KTooLarge(Exception):
    pass


class EmptyConcept(Exception):
    pass


@dataclass
class ConceptModel:
    k: int
    centroids: np.ndarray       # (k, d)
    assignment: np.ndarray      # (n,)
    majority_class: np.ndarray | None = None  # (k,), -1 for empty concepts
    objective_trace: np.ndarray | None = None

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c)


def _kmeans_pp_init(Z: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = Z.shape[0]
    centroids = np.empty((k, Z.shape[1]))
    centroids[0] = Z[rng.integers(n)]
    d2 = ((Z - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[i:] = Z[rng.integers(n, size=k - i)]
            break
        centroids[i] = Z[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((Z - centroids[i]) ** 2).sum(axis=1))
    return centroids


def extract_concepts(Z: np.ndarray, k: int, seed: int = 0,
                     labels: np.ndarray | None = None,
                     max_iter: int = 100, tol: float = 1e-6) -> ConceptModel:
    """k-means++ then Lloyd iterations until the max centroid shift drops
    below tol (or max_iter). Ties in assignment go to the lowest concept
    id; empty concepts keep their centroid. Deterministic given seed."""
    Z = np.asarray(Z, dtype=np.float64)
    n = Z.shape[0]
    if not 1 <= k <= n:
        raise KTooLarge(f"k={k} outside 1..{n}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(Z, k, rng)
    objective = []
    assignment = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((Z[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assignment = d2.argmin(axis=1)
        objective.append(float(d2[np.arange(n), assignment].sum()))
        new_centroids = centroids.copy()
        for c in range(k):
            members = assignment == c
            if members.any():
                new_centroids[c] = Z[members].mean(axis=0)
        shift = np.abs(new_centroids - centroids).max()
        centroids = new_centroids
        if shift < tol:
            break
    d2 = ((Z[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assignment = d2.argmin(axis=1)

    majority = None
    if labels is not None:
        majority = np.full(k, -1, dtype=np.int64)
        labels = np.asarray(labels)
        for c in range(k):
            members = labels[assignment == c]
            if members.size:
                majority[c] = np.bincount(members).argmax()
    return ConceptModel(k=k, centroids=centroids, assignment=assignment,
                        majority_class=majority,
                        objective_trace=np.asarray(objective))


def concept_representative(model: ConceptModel, Z: np.ndarray, c: int) -> int:
    """Member closest (Euclidean) to the member mean; ties to lowest id."""
    members = model.members(c)
    if members.size == 0:
        raise EmptyConcept(f"concept {c} has no members")
    center = Z[members].mean(axis=0)
    dists = np.linalg.norm(Z[members] - center, axis=1)
    return int(members[dists.argmin()])


def class_explanations(model: ConceptModel, Z: np.ndarray, labels: np.ndarray,
                       explain_fn) -> dict[int, list]:
    """Explain each nonempty concept's representative and group the records
    by the concept's majority class. Classes without a concept map to an
    empty list. explain_fn(node_id) -> ExplanationRecord."""
    labels = np.asarray(labels)
    out: dict[int, list] = {int(y): [] for y in np.unique(labels)}
    for c in range(model.k):
        members = model.members(c)
        if members.size == 0:
            continue
        rep = concept_representative(model, Z, c)
        majority = int(np.bincount(labels[members]).argmax())
        record = explain_fn(rep)
        out.setdefault(majority, []).append(record)
    return out


def concept_completeness(model: ConceptModel, labels: np.ndarray, split,
                         eval_split: str = SPLIT_VAL) -> float:
    """Accuracy of predicting labels from concept membership alone.

    The per-concept majority class is fitted on train nodes; concepts never
    seen in train fall back to the global train majority. Scored on
    eval_split nodes."""
    labels = np.asarray(labels)
    split = np.asarray(split)
    train = split == SPLIT_TRAIN
    fallback = int(np.bincount(labels[train]).argmax())
    pred_by_concept = np.full(model.k, fallback, dtype=np.int64)
    for c in range(model.k):
        members = labels[train & (model.assignment == c)]
        if members.size:
            pred_by_concept[c] = np.bincount(members).argmax()
    eval_idx = np.flatnonzero(split == eval_split)
    pred = pred_by_concept[model.assignment[eval_idx]]
    return float((pred == labels[eval_idx]).mean())
