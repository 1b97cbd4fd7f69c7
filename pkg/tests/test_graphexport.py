from __future__ import annotations

import re
import xml.etree.ElementTree as ET

import pytest

from controltree import ColorBy, GraphFormat, build_tree, export_graph, load_snapshot_path

from helpers import FIXTURES, five_node_tree

NS = {"g": "http://graphml.graphdrawing.org/xmlns"}


def s11_tree():
    return load_snapshot_path(str(FIXTURES / "s11.csv")).firm("S11").tree


def test_dot_structure() -> None:
    tree = five_node_tree()
    dot = export_graph(tree, "dot")
    assert dot.startswith('digraph "F1" {')
    assert dot.rstrip().endswith("}")
    assert 'node [style="filled"];' in dot
    assert dot.count(" -> ") == tree.node_count - 1
    assert '"A" -> "C";' in dot
    assert '"C" -> "E";' in dot
    # every node line carries the full attribute set
    node_lines = [l for l in dot.splitlines() if "fillcolor" in l]
    assert len(node_lines) == tree.node_count
    for line in node_lines:
        for key in ("level=", "country=", "sic1=", "sic2=", "size_rank="):
            assert key in line


def test_dot_escapes_quotes_and_backslashes() -> None:
    tree = build_tree(
        'say "hi"\\',
        [('r"oot', None, "US", "6021"), ("kid", 'r"oot', "US", "6021")],
    )
    dot = export_graph(tree, "dot")
    assert 'digraph "say \\"hi\\"\\\\" {' in dot
    assert '"r\\"oot" -> "kid";' in dot


def test_dot_depth_coloring_classes() -> None:
    dot = export_graph(s11_tree(), "dot", color_by="depth")
    colors = set(re.findall(r"fillcolor=(\"#[0-9a-f]{6}\")", dot))
    assert len(colors) == 5  # levels 0..4


def test_dot_sic1_coloring_classes() -> None:
    dot = export_graph(s11_tree(), "dot", color_by=ColorBy.SIC1)
    colors = set(re.findall(r"fillcolor=(\"#[0-9a-f]{6}\")", dot))
    assert len(colors) == 4  # four distinct leading digits


def test_root_has_max_size_rank() -> None:
    tree = s11_tree()
    dot = export_graph(tree, "dot")
    root_line = next(l for l in dot.splitlines() if l.lstrip().startswith('"R00"'))
    assert 'size_rank="5"' in root_line  # depth 4 tree: ranks 1..5
    assert 'level="0"' in root_line


def test_graphml_parses_and_declares_keys() -> None:
    tree = s11_tree()
    doc = ET.fromstring(export_graph(tree, GraphFormat.GRAPHML, color_by="country"))
    keys = {k.get("id"): k.get("attr.type") for k in doc.findall("g:key", NS)}
    assert keys == {
        "level": "int",
        "country": "string",
        "sic1": "string",
        "sic2": "string",
        "size_rank": "int",
        "color": "string",
    }
    graph = doc.find("g:graph", NS)
    assert graph is not None
    assert graph.get("edgedefault") == "directed"
    nodes = graph.findall("g:node", NS)
    edges = graph.findall("g:edge", NS)
    assert len(nodes) == tree.node_count
    assert len(edges) == tree.node_count - 1
    ids = {n.get("id") for n in nodes}
    for e in edges:
        assert e.get("source") in ids
        assert e.get("target") in ids
    # node data payload is complete and level matches the hierarchy
    levels = tree.levels()
    for n in nodes:
        data = {d.get("key"): d.text or "" for d in n.findall("g:data", NS)}
        assert set(data) == set(keys)
        assert int(data["level"]) == levels[n.get("id")]


def test_graphml_escapes_funny_ids() -> None:
    tree = build_tree(
        "<firm> & co",
        [("a<b", None, "US", "6021"), ('q"t', "a<b", "GB", "7372")],
    )
    text = export_graph(tree, "graphml")
    doc = ET.fromstring(text)
    graph = doc.find("g:graph", NS)
    assert graph.get("id") == "<firm> & co"
    assert {n.get("id") for n in graph.findall("g:node", NS)} == {"a<b", 'q"t'}


def test_bad_format_and_coloring_rejected() -> None:
    tree = five_node_tree()
    with pytest.raises(ValueError):
        export_graph(tree, "svg")
    with pytest.raises(ValueError):
        export_graph(tree, "dot", color_by="size")
