"""Hypergraphs, subhypergraphs, and receptive fields.

Builds a small hypergraph by hand, walks through the structural
operations every other capability rests on, and shows the JSON round
trip. Run from the repository root:

    python demos/01_hypergraphs_and_receptive_fields.py
"""

import numpy as np

from shypx.hypergraph import (
    Subhypergraph,
    complement,
    computational_subhypergraph,
    connected_component,
    from_json_dict,
    hypergraph_from_hyperedges,
    size_and_density,
    to_json_dict,
)

# Two overlapping hyperedges {0,1,2} and {2,3}, plus an island {4,5}.
G = hypergraph_from_hyperedges([[0, 1, 2], [2, 3], [4, 5]], num_nodes=6)
print(f"hypergraph: {G.num_nodes} nodes, {G.num_hyperedges} hyperedges, "
      f"{G.num_links} links")
print("links (node, hyperedge):", G.links())

# The receptive field of node 0 grows one hyperedge-hop per round.
for depth in range(4):
    comp = computational_subhypergraph(G, 0, depth)
    print(f"depth {depth}: |G_comp|_1 = {comp.size}, "
          f"nodes = {comp.node_ids().tolist()}")

# Explanations are subsets of the receptive field. Their complement holds
# every other receptive-field link, and sizes always add up.
comp = computational_subhypergraph(G, 0, 2)
expl = Subhypergraph(G, comp.kept_links[:3], focus_node=0)
rest = complement(comp, expl)
report = size_and_density(expl, comp)
print(f"\nexplanation size {report.size}, density {report.density:.2f}")
print(f"complement size {rest.size} (sizes sum to {comp.size})")

# Post-processing keeps only the piece connected to the focus node.
scattered = Subhypergraph(G, np.array([0, 1, 5]), focus_node=0)  # includes {4,5}
kept = connected_component(scattered, 0)
print(f"\nscattered candidate kept {scattered.size} links; "
      f"connected component around node 0 keeps {kept.size}")

# Lossless JSON round trip with canonical (byte-stable) ordering.
payload = to_json_dict(G)
assert from_json_dict(payload).links() == G.links()
print("\nJSON round trip is lossless; canonical link order is "
      "(hyperedge, node)")
