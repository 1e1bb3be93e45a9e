"""shypx: subhypergraph explanations for hypergraph neural networks.

A numpy/scipy library covering the full pipeline: synthetic benchmark
hypergraphs, a small trainable message-passing hyperGNN, instance-level
explanation by differentiable discrete subhypergraph sampling, global
explanation by concept extraction, and a generalized-fidelity evaluation
harness with Random/Gradient/Attention baselines.
"""

from shypx.hypergraph import (
    Hypergraph,
    Subhypergraph,
    SizeReport,
    build_hypergraph,
    hypergraph_from_hyperedges,
    computational_subhypergraph,
    complement,
    connected_component,
    size_and_density,
    save_hypergraph,
    load_hypergraph,
)

__all__ = [
    "Hypergraph",
    "Subhypergraph",
    "SizeReport",
    "build_hypergraph",
    "hypergraph_from_hyperedges",
    "computational_subhypergraph",
    "complement",
    "connected_component",
    "size_and_density",
    "save_hypergraph",
    "load_hypergraph",
]

__version__ = "0.1.0"
