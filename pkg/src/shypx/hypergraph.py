"""Hypergraph and subhypergraph data structures with structural operations.

A hypergraph is stored sparsely as a list of (node, hyperedge) incidence
links. Subhypergraphs are subsets of those links; connectivity is defined
on the bipartite node<->hyperedge incidence graph induced by the kept
links. Both types are immutable after construction and safe for concurrent
reads.

Canonical link order is lexicographic by (hyperedge_id, node_id), which
makes serialized output byte-stable across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class HypergraphError(Exception):
    """Base class for structural hypergraph errors."""


class DuplicateLink(HypergraphError):
    """The same (node, hyperedge) pair appears more than once."""


class DanglingId(HypergraphError):
    """A link references a node id outside 0..num_nodes-1."""


class EmptyHyperedge(HypergraphError):
    """A hyperedge with no member nodes was supplied."""


class NotASubset(HypergraphError):
    """An operation required one subhypergraph to be contained in another."""


SPLIT_TRAIN = "train"
SPLIT_VAL = "val"


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Hypergraph:
    """Immutable hypergraph over nodes 0..num_nodes-1.

    links are stored as two aligned arrays (link_nodes[i], link_edges[i]),
    sorted lexicographically by (hyperedge, node). Hyperedge ids are compact:
    every id in 0..num_hyperedges-1 occurs in at least one link.
    """

    num_nodes: int
    link_nodes: np.ndarray
    link_edges: np.ndarray
    features: np.ndarray
    labels: np.ndarray | None = None
    split: np.ndarray | None = None

    @property
    def num_links(self) -> int:
        return int(self.link_nodes.shape[0])

    @property
    def num_hyperedges(self) -> int:
        if self.num_links == 0:
            return 0
        return int(self.link_edges[-1]) + 1

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def num_classes(self) -> int:
        if self.labels is None:
            raise MissingLabels("hypergraph has no labels")
        return int(self.labels.max()) + 1

    @property
    def train_indices(self) -> np.ndarray:
        if self.split is None:
            raise MissingLabels("hypergraph has no train/val split")
        return np.flatnonzero(self.split == SPLIT_TRAIN)

    @property
    def val_indices(self) -> np.ndarray:
        if self.split is None:
            raise MissingLabels("hypergraph has no train/val split")
        return np.flatnonzero(self.split == SPLIT_VAL)

    def links(self) -> list[tuple[int, int]]:
        """Links as (node_id, hyperedge_id) pairs in canonical order."""
        return list(zip(self.link_nodes.tolist(), self.link_edges.tolist()))

    def hyperedge_members(self) -> list[list[int]]:
        """Member node ids per hyperedge, ascending within each hyperedge."""
        members: list[list[int]] = [[] for _ in range(self.num_hyperedges)]
        for v, e in zip(self.link_nodes.tolist(), self.link_edges.tolist()):
            members[e].append(v)
        return members

    def full_subhypergraph(self, focus_node: int | None = None) -> "Subhypergraph":
        return Subhypergraph(self, np.arange(self.num_links), focus_node)


class MissingLabels(HypergraphError):
    """Labels or split requested from an unlabeled hypergraph."""


@dataclass(frozen=True)
class Subhypergraph:
    """A subset of a parent hypergraph's links, optionally around a focus node.

    Each retained hyperedge fragment derives from exactly one parent
    hyperedge. Nodes and hyperedges are implied by the kept links, so empty
    hyperedges and isolated nodes cannot be represented. The 0-link
    ("trivial") subhypergraph is a first-class value: a model evaluated on
    it sees only the focus node's own features.
    """

    parent: Hypergraph
    kept_links: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    focus_node: int | None = None

    def __post_init__(self):
        kept = np.unique(np.asarray(self.kept_links, dtype=np.int64))
        if kept.size and (kept[0] < 0 or kept[-1] >= self.parent.num_links):
            raise DanglingId("kept link index out of range")
        object.__setattr__(self, "kept_links", _freeze(kept))

    @property
    def size(self) -> int:
        """Number of kept links, |G|_1."""
        return int(self.kept_links.size)

    def node_ids(self) -> np.ndarray:
        return np.unique(self.parent.link_nodes[self.kept_links])

    def hyperedge_ids(self) -> np.ndarray:
        return np.unique(self.parent.link_edges[self.kept_links])

    def link_mask(self) -> np.ndarray:
        """0/1 mask over the parent's links, aligned with canonical order."""
        mask = np.zeros(self.parent.num_links)
        mask[self.kept_links] = 1.0
        return mask

    def contains(self, other: "Subhypergraph") -> bool:
        return bool(np.isin(other.kept_links, self.kept_links).all())


@dataclass(frozen=True)
class SizeReport:
    """Explanation concision: link count and its fraction of |G_comp|_1."""

    size: int
    density: float


def build_hypergraph(
    links,
    num_nodes: int,
    features: np.ndarray | None = None,
    labels=None,
    split=None,
) -> Hypergraph:
    """Validate and canonicalize a hypergraph from (node, hyperedge) pairs.

    Hyperedge ids may be arbitrary ints; they are compacted to
    0..num_hyperedges-1 preserving ascending order. Raises DuplicateLink,
    DanglingId, or EmptyHyperedge on invalid input.
    """
    links = np.asarray(list(links), dtype=np.int64).reshape(-1, 2)
    if num_nodes <= 0 and links.shape[0] == 0:
        raise DanglingId("empty hypergraph: need links or num_nodes > 0")

    nodes, edges = links[:, 0], links[:, 1]
    if links.shape[0]:
        if nodes.min() < 0 or nodes.max() >= num_nodes:
            raise DanglingId(
                f"link node id out of range 0..{num_nodes - 1}"
            )
        if edges.min() < 0:
            raise DanglingId("negative hyperedge id")
        # compact hyperedge ids, keeping ascending order
        uniq, edges = np.unique(edges, return_inverse=True)
        order = np.lexsort((nodes, edges))
        nodes, edges = nodes[order], edges[order]
        pairs = nodes.astype(np.int64) * (edges.max() + 1) + edges
        if np.unique(pairs).size != pairs.size:
            raise DuplicateLink("duplicate (node, hyperedge) link")

    if features is None:
        features = np.ones((num_nodes, 1))
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != num_nodes:
        raise DanglingId(
            f"features must have {num_nodes} rows, got shape {features.shape}"
        )

    if labels is not None:
        labels = _freeze(np.asarray(labels, dtype=np.int64))
        if labels.shape != (num_nodes,):
            raise DanglingId("labels must have one entry per node")
    if split is not None:
        split = np.asarray(split, dtype="U5")
        if split.shape != (num_nodes,) or not np.isin(split, [SPLIT_TRAIN, SPLIT_VAL]).all():
            raise DanglingId("split must tag every node 'train' or 'val'")
        split = _freeze(split)

    return Hypergraph(
        num_nodes=int(num_nodes),
        link_nodes=_freeze(nodes),
        link_edges=_freeze(edges),
        features=_freeze(features),
        labels=labels,
        split=split,
    )


def hypergraph_from_hyperedges(
    hyperedges, num_nodes: int, features=None, labels=None, split=None
) -> Hypergraph:
    """Build from a list of hyperedges, each a collection of node ids."""
    links = []
    for e_id, members in enumerate(hyperedges):
        members = list(members)
        if not members:
            raise EmptyHyperedge(f"hyperedge {e_id} has no members")
        links.extend((v, e_id) for v in members)
    return build_hypergraph(links, num_nodes, features, labels, split)


def _incidence_lists(G: Hypergraph):
    """Link indices grouped per node and per hyperedge."""
    by_node: list[list[int]] = [[] for _ in range(G.num_nodes)]
    by_edge: list[list[int]] = [[] for _ in range(G.num_hyperedges)]
    for i, (v, e) in enumerate(zip(G.link_nodes.tolist(), G.link_edges.tolist())):
        by_node[v].append(i)
        by_edge[e].append(i)
    return by_node, by_edge


def computational_subhypergraph(G: Hypergraph, v: int, depth: int) -> Subhypergraph:
    """Receptive field of node v under `depth` rounds of message passing.

    Each round adds every hyperedge incident to the current node set, then
    all links of those hyperedges (full membership). depth 0 gives the
    trivial subhypergraph.
    """
    if not 0 <= v < G.num_nodes:
        raise DanglingId(f"node {v} out of range")
    if depth < 0:
        raise DanglingId("depth must be >= 0")
    by_node, by_edge = _incidence_lists(G)
    nodes = {v}
    edges: set[int] = set()
    kept: set[int] = set()
    for _ in range(depth):
        frontier_edges = {
            int(G.link_edges[i]) for u in nodes for i in by_node[u]
        } - edges
        if not frontier_edges:
            break
        edges |= frontier_edges
        new_links = [i for e in frontier_edges for i in by_edge[e]]
        kept.update(new_links)
        nodes |= {int(G.link_nodes[i]) for i in new_links}
    return Subhypergraph(G, np.fromiter(kept, dtype=np.int64, count=len(kept)), v)


def complement(G_comp: Subhypergraph, G_expl: Subhypergraph) -> Subhypergraph:
    """Links of G_comp that are not in G_expl; focus node preserved."""
    if G_expl.parent is not G_comp.parent:
        raise NotASubset("subhypergraphs have different parents")
    if not G_comp.contains(G_expl):
        raise NotASubset("explanation is not contained in the reference")
    kept = np.setdiff1d(G_comp.kept_links, G_expl.kept_links, assume_unique=True)
    return Subhypergraph(G_comp.parent, kept, G_comp.focus_node)


def connected_component(G_sub: Subhypergraph, v: int) -> Subhypergraph:
    """Maximal kept-link subset whose bipartite incidence graph contains v.

    Returns the trivial subhypergraph (focus v, no links) when no kept link
    touches v. Idempotent.
    """
    G = G_sub.parent
    if not 0 <= v < G.num_nodes:
        raise DanglingId(f"node {v} out of range")
    kept = G_sub.kept_links
    if kept.size == 0:
        return Subhypergraph(G, np.empty(0, dtype=np.int64), v)

    nodes = G.link_nodes[kept]
    edges = G.link_edges[kept]
    # BFS over the bipartite incidence graph restricted to kept links
    node_links: dict[int, list[int]] = {}
    edge_links: dict[int, list[int]] = {}
    for i in range(kept.size):
        node_links.setdefault(int(nodes[i]), []).append(i)
        edge_links.setdefault(int(edges[i]), []).append(i)

    seen_nodes = {v}
    seen_edges: set[int] = set()
    in_component = np.zeros(kept.size, dtype=bool)
    frontier = [("n", v)]
    while frontier:
        kind, x = frontier.pop()
        idxs = node_links.get(x, []) if kind == "n" else edge_links.get(x, [])
        for i in idxs:
            if in_component[i]:
                continue
            in_component[i] = True
            u, e = int(nodes[i]), int(edges[i])
            if e not in seen_edges:
                seen_edges.add(e)
                frontier.append(("e", e))
            if u not in seen_nodes:
                seen_nodes.add(u)
                frontier.append(("n", u))
    return Subhypergraph(G, kept[in_component], v)


def size_and_density(G_expl: Subhypergraph, G_comp: Subhypergraph) -> SizeReport:
    """Concision measures: |G_expl|_1 and |G_expl|_1 / |G_comp|_1."""
    if G_expl.parent is not G_comp.parent or not G_comp.contains(G_expl):
        raise NotASubset("explanation is not contained in the reference")
    size = G_expl.size
    density = size / G_comp.size if G_comp.size else 0.0
    return SizeReport(size=size, density=density)


def to_json_dict(G: Hypergraph) -> dict:
    return {
        "num_nodes": G.num_nodes,
        "hyperedges": G.hyperedge_members(),
        "features": G.features.tolist(),
        "labels": None if G.labels is None else G.labels.tolist(),
        "split": None if G.split is None else G.split.tolist(),
    }


def from_json_dict(d: dict) -> Hypergraph:
    return hypergraph_from_hyperedges(
        d["hyperedges"],
        num_nodes=d["num_nodes"],
        features=np.asarray(d["features"], dtype=np.float64),
        labels=d.get("labels"),
        split=d.get("split"),
    )


def save_hypergraph(G: Hypergraph, path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(G), separators=(",", ":")))


def load_hypergraph(path) -> Hypergraph:
    return from_json_dict(json.loads(Path(path).read_text()))
