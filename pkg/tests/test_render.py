from __future__ import annotations

import xml.etree.ElementTree as ET

import pytest

import oddkit

SVG_NS = "{http://www.w3.org/2000/svg}"


def _render_corpus(extended_doc, golden_dataset, chain):
    nodes = [n for n in extended_doc.nodes if len(n.parameters) == 2]
    rows = oddkit.label_rows(golden_dataset.points, chain)
    labeled = [(p, r.category) for p, r in zip(golden_dataset.points, rows)]
    return oddkit.render_svg(nodes, labeled)


def test_svg_structure(extended_doc, golden_dataset, chain):
    svg = _render_corpus(extended_doc, golden_dataset, chain)
    root = ET.fromstring(svg)
    paths = root.findall(f".//{SVG_NS}path[@class='region']")
    assert len(paths) == 4
    assert {p.get("id") for p in paths} == {
        "region-SOD",
        "region-MLCODD_oper",
        "region-MLCODD_spec",
        "region-MLMODD",
    }
    circles = root.findall(f".//{SVG_NS}circle")
    assert len(circles) == 12
    categories = {c.get("class").split("cat-")[1] for c in circles}
    assert categories == {"Nominal", "EdgeCase", "FeasibleCornerCase", "Inlier", "Novelty", "Any"}
    legend_entries = root.findall(f".//{SVG_NS}g[@class='legend']/{SVG_NS}g")
    legend_cats = {g.get("class").split("cat-")[1] for g in legend_entries}
    assert legend_cats == categories


def test_svg_is_deterministic(extended_doc, golden_dataset, chain):
    a = _render_corpus(extended_doc, golden_dataset, chain)
    b = _render_corpus(extended_doc, golden_dataset, chain)
    assert a == b
    # no volatile content
    assert "date" not in a.lower() and "time" not in a.lower()


def test_render_rejects_incompatible_nodes(extended_doc):
    with pytest.raises(ValueError):
        oddkit.render_svg([extended_doc.node("MLMODD_ext")])
    with pytest.raises(ValueError):
        oddkit.render_svg([])


def test_render_polytope_node_via_projection_free_loop(extended_doc):
    # a 2-parameter polytope node renders through its vertex hull
    doc = oddkit.parse_spec(
        """
odd "BOX" level mlm_odd {
  param x: u range [0, 1]
  param y: u range [0, 1]
  region polytope {
    halfspace 1 0 <= 1
    halfspace -1 0 <= 0
    halfspace 0 1 <= 1
    halfspace 0 -1 <= 0
    vertex (0,0) vertex (1,0) vertex (1,1) vertex (0,1)
  }
}
"""
    )
    assert doc.ok
    svg = oddkit.render_svg(doc.nodes)
    root = ET.fromstring(svg)
    assert root.find(f".//{SVG_NS}path[@id='region-BOX']") is not None
