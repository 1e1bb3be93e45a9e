"""Synthetic benchmark hypergraphs: base-plus-motif construction.

Four standard configurations are provided (see BENCHMARKS): a random base
or a deterministic 3-uniform binary-tree base, decorated with house /
cycle / grid motifs attached through degree-2 hyperedges, plus random
degree-2 perturbation hyperedges. Node labels encode position (base vs
part of motif), so the classification task depends on structure alone for
the all-ones feature variants.

Randomness: numpy Generator over PCG64. assemble_dataset spawns one child
seed per stage from SeedSequence(spec.seed) in a fixed order (community
bases, motif attachment, perturbations, inter-community edges, features,
split), so a spec is reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from shypx.hypergraph import Hypergraph, build_hypergraph


class GenerationFailed(Exception):
    """Random base generation could not reach the target size."""


class UnknownKind(Exception):
    pass


@dataclass(frozen=True)
class BipartiteParams:
    """Random-base sampling sizes: part sizes (n, m) and edge count k."""

    n: int = 550
    m: int = 400
    k: int = 660


@dataclass(frozen=True)
class DatasetSpec:
    base_kind: str = "random"  # random | tree
    motif_kind: str = "house"  # house | cycle | grid
    target_base_nodes: int = 312
    num_motifs: int = 100
    num_perturbations: int = 80
    num_communities: int = 1
    num_inter_community_edges: int = 0
    feature_kind: str = "ones"  # ones | bimodal_normal
    feature_dim: int = 10
    seed: int = 0
    bipartite: BipartiteParams = field(default_factory=BipartiteParams)

    def __post_init__(self):
        if self.num_communities not in (1, 2):
            raise UnknownKind("num_communities must be 1 or 2")
        if self.num_communities == 2 and self.feature_kind != "bimodal_normal":
            raise UnknownKind("two communities require bimodal_normal features")

    def to_json_dict(self) -> dict:
        d = {
            "base_kind": self.base_kind,
            "motif_kind": self.motif_kind,
            "target_base_nodes": self.target_base_nodes,
            "num_motifs": self.num_motifs,
            "num_perturbations": self.num_perturbations,
            "num_communities": self.num_communities,
            "num_inter_community_edges": self.num_inter_community_edges,
            "feature_kind": self.feature_kind,
            "feature_dim": self.feature_dim,
            "seed": self.seed,
        }
        d["bipartite"] = [self.bipartite.n, self.bipartite.m, self.bipartite.k]
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "DatasetSpec":
        d = dict(d)
        bip = d.pop("bipartite", None)
        spec = cls(**d)
        if bip is not None:
            spec = replace(spec, bipartite=BipartiteParams(*bip))
        return spec


@dataclass(frozen=True)
class Motif:
    """A small labeled hypergraph attached to the base via its anchor node."""

    name: str
    num_nodes: int
    hyperedges: tuple[tuple[int, ...], ...]
    anchor: int
    labels: tuple[int, ...]


def build_motif(kind: str) -> Motif:
    """house / cycle / grid motifs with their class labels and anchor.

    house: roof {t,m1,m2} over body {m1,m2,b1,b2}; classes top=1, middle=2,
    bottom=3; the anchor is one of the two middle nodes. cycle: 6-ring
    covered by three degree-3 hyperedges, all class 1. grid: 3x3 covered by
    its rows and columns, all class 1, anchored at a corner.
    """
    if kind == "house":
        return Motif("house", 5, ((0, 1, 2), (1, 2, 3, 4)), anchor=1,
                     labels=(1, 2, 2, 3, 3))
    if kind == "cycle":
        return Motif("cycle", 6, ((0, 1, 2), (2, 3, 4), (4, 5, 0)), anchor=0,
                     labels=(1, 1, 1, 1, 1, 1))
    if kind == "grid":
        rows = ((0, 1, 2), (3, 4, 5), (6, 7, 8))
        cols = ((0, 3, 6), (1, 4, 7), (2, 5, 8))
        return Motif("grid", 9, rows + cols, anchor=0, labels=(1,) * 9)
    raise UnknownKind(f"unknown motif kind {kind!r}")


def generate_tree_base(depth: int) -> Hypergraph:
    """Complete binary tree with 2^depth - 1 nodes, one hyperedge per
    internal node enclosing {parent, left child, right child}."""
    if depth < 1:
        raise GenerationFailed("tree depth must be >= 1")
    n = 2**depth - 1
    edges = [[v, 2 * v + 1, 2 * v + 2] for v in range(n) if 2 * v + 2 < n]
    links = [(v, e) for e, members in enumerate(edges) for v in members]
    return build_hypergraph(links, num_nodes=n)


def _bipartite_components(n: int, m: int, edges: np.ndarray):
    """Connected components of the bipartite graph; edges are (a, b) pairs
    with a in 0..n-1 and b in 0..m-1. Returns list of (a_set, edge_rows)."""
    adj_a: list[list[int]] = [[] for _ in range(n)]
    adj_b: list[list[int]] = [[] for _ in range(m)]
    for i, (a, b) in enumerate(edges):
        adj_a[a].append(i)
        adj_b[b].append(i)
    seen_a = [False] * n
    seen_b = [False] * m
    comps = []
    for start in range(n):
        if seen_a[start] or not adj_a[start]:
            continue
        a_set, rows = [], set()
        stack = [("a", start)]
        seen_a[start] = True
        while stack:
            side, x = stack.pop()
            if side == "a":
                a_set.append(x)
                for i in adj_a[x]:
                    rows.add(i)
                    b = int(edges[i, 1])
                    if not seen_b[b]:
                        seen_b[b] = True
                        stack.append(("b", b))
            else:
                for i in adj_b[x]:
                    rows.add(i)
                    a = int(edges[i, 0])
                    if not seen_a[a]:
                        seen_a[a] = True
                        stack.append(("a", a))
        comps.append((a_set, rows))
    return comps


def generate_random_base(
    target_nodes: int,
    params: BipartiteParams = BipartiteParams(),
    seed: int | np.random.SeedSequence = 0,
    max_attempts: int = 50,
) -> Hypergraph:
    """Random base by inverse star expansion of a random bipartite graph.

    Samples k uniform edges between parts of size (n, m), takes the largest
    connected component, and turns part-B vertices into hyperedges over
    their part-A neighbors. If the component has fewer than target_nodes
    part-A vertices, resamples with k increased by 20% (up to max_attempts).
    The component is then restricted to the first target_nodes part-A
    vertices in BFS order; hyperedges are induced on the kept set and
    now-empty hyperedges dropped. Deterministic given seed.
    """
    if target_nodes < 1:
        raise GenerationFailed("target_nodes must be >= 1")
    rng = np.random.default_rng(seed)
    n, m, k = params.n, params.m, params.k
    for _ in range(max_attempts):
        k = min(k, n * m)
        flat = rng.choice(n * m, size=k, replace=False) if k else np.empty(0, np.int64)
        edges = np.stack([flat // m, flat % m], axis=1).astype(np.int64)
        comps = _bipartite_components(n, m, edges)
        if comps:
            a_sets, rows = max(comps, key=lambda c: (len(c[0]), -min(c[0])))
            if len(a_sets) >= target_nodes or target_nodes == 1:
                return _restrict_component(n, edges, rows, target_nodes)
        elif target_nodes == 1:
            return build_hypergraph([], num_nodes=1)
        k = math.ceil(k * 1.2)
    raise GenerationFailed(
        f"largest component below {target_nodes} part-A vertices "
        f"after {max_attempts} attempts"
    )


def _restrict_component(n, edges, rows, target_nodes) -> Hypergraph:
    """BFS the component from its smallest part-A vertex, keep the first
    target_nodes part-A vertices, induce hyperedges on them."""
    rows = sorted(rows)
    adj_a: dict[int, list[int]] = {}
    adj_b: dict[int, list[int]] = {}
    for i in rows:
        a, b = int(edges[i, 0]), int(edges[i, 1])
        adj_a.setdefault(a, []).append(b)
        adj_b.setdefault(b, []).append(a)
    start = min(adj_a)
    order: list[int] = []
    seen_a, seen_b = {start}, set()
    queue = [("a", start)]
    while queue:
        side, x = queue.pop(0)
        if side == "a":
            order.append(x)
            for b in sorted(adj_a[x]):
                if b not in seen_b:
                    seen_b.add(b)
                    queue.append(("b", b))
        else:
            for a in sorted(adj_b[x]):
                if a not in seen_a:
                    seen_a.add(a)
                    queue.append(("a", a))
    kept = order[:target_nodes]
    local = {a: i for i, a in enumerate(kept)}
    links = []
    for e_local, b in enumerate(sorted(seen_b)):
        members = [local[a] for a in adj_b[b] if a in local]
        links.extend((v, e_local) for v in sorted(set(members)))
    return build_hypergraph(links, num_nodes=len(kept))


def _tree_depth_for(target_nodes: int) -> int:
    depth = round(math.log2(target_nodes + 1))
    if 2**depth - 1 != target_nodes:
        raise GenerationFailed(
            f"tree base needs 2^d - 1 nodes, got target {target_nodes}"
        )
    return depth


def _build_base(spec: DatasetSpec, target: int, seed) -> Hypergraph:
    if spec.base_kind == "random":
        return generate_random_base(target, spec.bipartite, seed)
    if spec.base_kind == "tree":
        return generate_tree_base(_tree_depth_for(target))
    raise UnknownKind(f"unknown base kind {spec.base_kind!r}")


def _split_evenly(total: int, parts: int) -> list[int]:
    each = total // parts
    out = [each] * parts
    for i in range(total - each * parts):
        out[i] += 1
    return out


def assemble_dataset(spec: DatasetSpec) -> Hypergraph:
    """Build the full labeled benchmark hypergraph from a spec.

    Base nodes are class 0; motif nodes carry the motif's labels; the
    second community's labels are offset by 4. Each motif attaches through
    one degree-2 hyperedge {anchor, random base node}. Perturbations are
    degree-2 hyperedges between random distinct nodes of one community
    (resampled if they duplicate an existing degree-2 hyperedge).
    80% of nodes are tagged train, the rest val, uniformly at random.
    """
    motif = build_motif(spec.motif_kind)
    ss = np.random.SeedSequence(spec.seed)
    seeds = ss.spawn(6)
    rng_attach = np.random.default_rng(seeds[2])
    rng_perturb = np.random.default_rng(seeds[3])
    rng_feat = np.random.default_rng(seeds[4])
    rng_split = np.random.default_rng(seeds[5])

    base_targets = _split_evenly(spec.target_base_nodes, spec.num_communities)
    motif_counts = _split_evenly(spec.num_motifs, spec.num_communities)
    perturb_counts = _split_evenly(spec.num_perturbations, spec.num_communities)

    links: list[tuple[int, int]] = []
    labels: list[int] = []
    community: list[int] = []
    degree2: set[frozenset] = set()
    next_edge = 0
    node_offset = 0
    community_ranges = []

    def add_edge(members) -> None:
        nonlocal next_edge
        links.extend((v, next_edge) for v in members)
        if len(members) == 2:
            degree2.add(frozenset(members))
        next_edge += 1

    def draw_pair(rng, lo, hi):
        while True:
            a, b = int(rng.integers(lo, hi)), int(rng.integers(lo, hi))
            if a != b and frozenset((a, b)) not in degree2:
                return a, b

    for c in range(spec.num_communities):
        base = _build_base(spec, base_targets[c], seeds[c])
        offset = 4 * c
        for members in base.hyperedge_members():
            add_edge([v + node_offset for v in members])
        labels.extend([offset] * base.num_nodes)
        community.extend([c] * base.num_nodes)
        base_lo, base_hi = node_offset, node_offset + base.num_nodes
        cursor = base_hi
        for _ in range(motif_counts[c]):
            for e in motif.hyperedges:
                add_edge([cursor + v for v in e])
            anchor_target = int(rng_attach.integers(base_lo, base_hi))
            add_edge([cursor + motif.anchor, anchor_target])
            labels.extend(l + offset for l in motif.labels)
            community.extend([c] * motif.num_nodes)
            cursor += motif.num_nodes
        for _ in range(perturb_counts[c]):
            add_edge(draw_pair(rng_perturb, node_offset, cursor))
        community_ranges.append((node_offset, cursor))
        node_offset = cursor

    for _ in range(spec.num_inter_community_edges if spec.num_communities == 2 else 0):
        while True:
            a = int(rng_perturb.integers(*community_ranges[0]))
            b = int(rng_perturb.integers(*community_ranges[1]))
            if frozenset((a, b)) not in degree2:
                break
        add_edge((a, b))

    num_nodes = node_offset
    if spec.feature_kind == "ones":
        features = np.ones((num_nodes, spec.feature_dim))
    elif spec.feature_kind == "bimodal_normal":
        means = np.asarray(community, dtype=np.float64)[:, None]
        features = means + rng_feat.normal(size=(num_nodes, spec.feature_dim))
    else:
        raise UnknownKind(f"unknown feature kind {spec.feature_kind!r}")

    perm = rng_split.permutation(num_nodes)
    n_train = round(0.8 * num_nodes)
    split = np.full(num_nodes, "val", dtype="U5")
    split[perm[:n_train]] = "train"

    return build_hypergraph(links, num_nodes, features, labels, split)


BENCHMARKS: dict[str, DatasetSpec] = {
    "h_rand_house": DatasetSpec(
        base_kind="random", motif_kind="house", target_base_nodes=312,
        num_motifs=100, num_perturbations=80,
    ),
    "h_comm_house": DatasetSpec(
        base_kind="random", motif_kind="house", target_base_nodes=648,
        num_motifs=200, num_perturbations=80, num_communities=2,
        num_inter_community_edges=80, feature_kind="bimodal_normal",
    ),
    "h_tree_cycle": DatasetSpec(
        base_kind="tree", motif_kind="cycle", target_base_nodes=255,
        num_motifs=80, num_perturbations=80,
    ),
    "h_tree_grid": DatasetSpec(
        base_kind="tree", motif_kind="grid", target_base_nodes=255,
        num_motifs=80, num_perturbations=80,
    ),
}


def benchmark_spec(name: str, seed: int = 0) -> DatasetSpec:
    key = name.lower().replace("-", "_")
    if key not in BENCHMARKS:
        raise UnknownKind(f"unknown benchmark {name!r}; one of {sorted(BENCHMARKS)}")
    return replace(BENCHMARKS[key], seed=seed)
