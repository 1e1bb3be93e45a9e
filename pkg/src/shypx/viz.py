"""DOT export of explanation subhypergraphs.

Bipartite rendering: circles for nodes (filled by class color, bold
outline on the focus node), squares for hyperedges, one undirected edge
per kept link. Output ordering is stable, so identical explanations
serialize to identical bytes.
"""

from __future__ import annotations


from shypx.hypergraph import Subhypergraph

# repeating palette indexed by class id
_COLORS = (
    "lightsteelblue", "gold", "salmon", "palegreen",
    "plum", "khaki", "lightcyan", "sandybrown",
)


def class_color(label: int | None) -> str:
    if label is None or label < 0:
        return "white"
    return _COLORS[label % len(_COLORS)]


def export_dot(explanation: Subhypergraph, title: str = "explanation") -> str:
    """Render a subhypergraph (plus its focus node, even when linkless)."""
    G = explanation.parent
    labels = G.labels
    nodes = set(explanation.node_ids().tolist())
    if explanation.focus_node is not None:
        nodes.add(int(explanation.focus_node))
    lines = [f'graph "{title}" {{', "  layout=neato;", "  overlap=false;"]
    for v in sorted(nodes):
        label = None if labels is None else int(labels[v])
        style = (
            f'shape=circle, style=filled, fillcolor="{class_color(label)}"'
        )
        if explanation.focus_node is not None and v == explanation.focus_node:
            style += ", penwidth=3"
        lines.append(f'  "v{v}" [{style}, label="{v}"];')
    for e in sorted(explanation.hyperedge_ids().tolist()):
        lines.append(
            f'  "e{e}" [shape=square, style=filled, fillcolor=gray90, label="e{e}"];'
        )
    for i in explanation.kept_links.tolist():
        v, e = int(G.link_nodes[i]), int(G.link_edges[i])
        lines.append(f'  "v{v}" -- "e{e}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
