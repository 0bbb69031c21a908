import xml.etree.ElementTree as ET

import pytest

from moduli_walls import GraphType, build_graph, render_svg
from moduli_walls.render import RenderOptions, count_vertex_markers

NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def graphs(wall):
    from test_coordinates import shifted
    return {GraphType.GammaZero: build_graph(wall),
            GraphType.GammaPlus: build_graph(shifted(wall, 1.03)),
            GraphType.GammaMinus: build_graph(shifted(wall, 0.97))}


def test_empty_graph_has_axes_only():
    root = ET.fromstring(render_svg())
    assert root.tag == NS + "svg"
    lines = root.findall(NS + "line")
    assert len(lines) == 2 and all(ln.get("class") == "axis" for ln in lines)
    assert not root.findall(NS + "circle") and not root.findall(NS + "polyline")


@pytest.mark.parametrize("kind,n", [(GraphType.GammaZero, 7), (GraphType.GammaPlus, 8),
                                    (GraphType.GammaMinus, 8)])
def test_vertex_marker_count(graphs, kind, n):
    svg = render_svg(graphs[kind])
    ET.fromstring(svg)
    assert count_vertex_markers(svg) == n


def test_styles_are_distinct(graphs):
    root = ET.fromstring(render_svg(graphs[GraphType.GammaZero]))
    classes = {p.get("class") for p in root.findall(NS + "polyline")}
    assert classes == {"slit", "horizontal", "vertical"}
    circles = {c.get("class") for c in root.findall(NS + "circle")}
    assert {"vertex branch", "vertex critical", "junction"} <= circles


def test_deterministic(wall):
    from test_coordinates import shifted
    opts = RenderOptions(title="GammaPlus")
    first = render_svg(build_graph(shifted(wall, 1.03)), opts)
    second = render_svg(build_graph(shifted(wall, 1.03)), opts)
    assert first.encode() == second.encode()


def test_options(graphs):
    G = graphs[GraphType.GammaMinus]
    bare = render_svg(G, RenderOptions(show_slits=False, labels=False))
    assert 'class="slit"' not in bare and "<text" not in bare
