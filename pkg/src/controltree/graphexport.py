"""Render a control tree as a DOT or GraphML document.

Nodes carry the hierarchy level, the country and truncated SIC labels,
and a size rank that shrinks with level (the root draws largest).  A
color is assigned per class of the selected coloring attribute so that
viewers show the partition without any styling work.
"""
from __future__ import annotations

from enum import Enum
from xml.sax.saxutils import escape, quoteattr

from .tree import ControlTree, LabelKind, sic_prefix, tree_depth

# matplotlib's tab20, hard-coded so exports do not pull in a plotting backend
_PALETTE = (
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c",
    "#98df8a", "#d62728", "#ff9896", "#9467bd", "#c5b0d5",
    "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f",
    "#c7c7c7", "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
)


class GraphFormat(str, Enum):
    DOT = "dot"
    GRAPHML = "graphml"


class ColorBy(str, Enum):
    DEPTH = "depth"
    COUNTRY = "country"
    SIC1 = "sic1"
    SIC2 = "sic2"


def _node_attrs(tree: ControlTree, color_by: ColorBy) -> dict[str, dict[str, str]]:
    levels = tree.levels()
    max_level = tree_depth(tree)
    if color_by is ColorBy.DEPTH:
        classes = {eid: str(levels[eid]) for eid in tree.entity_ids}
    else:
        kind = LabelKind(color_by.value)
        classes = {eid: tree.label(eid, kind) for eid in tree.entity_ids}
    palette = {
        cls: _PALETTE[i % len(_PALETTE)]
        for i, cls in enumerate(sorted(set(classes.values())))
    }
    out = {}
    for eid, ent in tree.entities.items():
        out[eid] = {
            "level": str(levels[eid]),
            "country": ent.labels.country,
            "sic1": sic_prefix(ent.labels.sic, 1),
            "sic2": sic_prefix(ent.labels.sic, 2),
            "size_rank": str(max_level - levels[eid] + 1),
            "color": palette[classes[eid]],
        }
    return out


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_graph(
    tree: ControlTree,
    fmt: GraphFormat | str = GraphFormat.DOT,
    color_by: ColorBy | str = ColorBy.DEPTH,
) -> str:
    """Serialize the tree with per-node level, label and color attributes."""
    fmt = GraphFormat(fmt)
    color_by = ColorBy(color_by)
    attrs = _node_attrs(tree, color_by)
    if fmt is GraphFormat.DOT:
        return _to_dot(tree, attrs)
    return _to_graphml(tree, attrs)


def _to_dot(tree: ControlTree, attrs: dict[str, dict[str, str]]) -> str:
    lines = [f"digraph {_dot_quote(tree.firm_id)} {{"]
    lines.append('  node [style="filled"];')
    for eid in tree.entity_ids:
        a = attrs[eid]
        fields = ", ".join(
            f"{key}={_dot_quote(a[key])}"
            for key in ("level", "country", "sic1", "sic2", "size_rank")
        )
        lines.append(f"  {_dot_quote(eid)} [{fields}, fillcolor={_dot_quote(a['color'])}];")
    for eid, ent in tree.entities.items():
        if ent.parent is not None:
            lines.append(f"  {_dot_quote(ent.parent)} -> {_dot_quote(eid)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_GRAPHML_KEYS = (
    ("level", "int"),
    ("country", "string"),
    ("sic1", "string"),
    ("sic2", "string"),
    ("size_rank", "int"),
    ("color", "string"),
)


def _to_graphml(tree: ControlTree, attrs: dict[str, dict[str, str]]) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns"',
        '         xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"',
        '         xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns'
        ' http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">',
    ]
    for name, typ in _GRAPHML_KEYS:
        lines.append(
            f'  <key id="{name}" for="node" attr.name="{name}" attr.type="{typ}"/>'
        )
    lines.append(f"  <graph id={quoteattr(tree.firm_id)} edgedefault=\"directed\">")
    for eid in tree.entity_ids:
        lines.append(f"    <node id={quoteattr(eid)}>")
        for name, _ in _GRAPHML_KEYS:
            lines.append(f'      <data key="{name}">{escape(attrs[eid][name])}</data>')
        lines.append("    </node>")
    edge_no = 0
    for eid, ent in tree.entities.items():
        if ent.parent is not None:
            lines.append(
                f'    <edge id="e{edge_no}" source={quoteattr(ent.parent)} '
                f"target={quoteattr(eid)}/>"
            )
            edge_no += 1
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"
