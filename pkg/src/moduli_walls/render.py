"""Deterministic SVG rendering of traced graphs.

Only the divisor points of (d eta)**2 (branch points and critical points)
are drawn as ``vertex`` markers. Regular points where a separatrix meets
the zero set of W are drawn with the ``junction`` class.
"""

from dataclasses import dataclass
from xml.sax.saxutils import escape

from .foliation import HORIZONTAL

STYLE = """
.axis { stroke: #999; stroke-width: 0.6; }
.slit { stroke: #bbb; stroke-width: 1.2; stroke-dasharray: 4 3; fill: none; }
.vertical { stroke: #1f5fbf; stroke-width: 1.6; fill: none; }
.horizontal { stroke: #c0392b; stroke-width: 1.2; fill: none; }
.vertex.branch { fill: #000; }
.vertex.critical { fill: #e67e22; stroke: #000; stroke-width: 0.6; }
.junction { fill: #fff; stroke: #1f5fbf; stroke-width: 0.8; }
text { font-family: sans-serif; font-size: 10px; }
"""


@dataclass(frozen=True)
class RenderOptions:
    width: int = 640
    height: int = 480
    margin: float = 0.15
    show_slits: bool = True
    labels: bool = True
    title: str = ""


def _fmt(v):
    return f"{v:.3f}"


def _bounds(G, opts):
    pts = []
    if G is not None:
        pts += [v.position for v in G.vertices]
        for e in G.edges:
            pts += list(e.path.vertices)
        if opts.show_slits:
            for s in G.slits:
                pts += list(s)
    pts += [complex(-1.5, -1.0), complex(1.5, 1.0)]
    xs = [p.real for p in pts]
    ys = [p.imag for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    dx, dy = (x1 - x0) or 1.0, (y1 - y0) or 1.0
    m = opts.margin
    return x0 - m * dx, x1 + m * dx, y0 - m * dy, y1 + m * dy


def render_svg(G=None, opts=None):
    """SVG document for a traced graph, or just the axes when ``G`` is None
    or empty. The output depends only on the inputs."""
    opts = opts or RenderOptions()
    x0, x1, y0, y1 = _bounds(G, opts)
    sx = opts.width / (x1 - x0)
    sy = opts.height / (y1 - y0)
    s = min(sx, sy)

    def X(p):
        return _fmt((p.real - x0) * s), _fmt((y1 - p.imag) * s)

    W, H = _fmt((x1 - x0) * s), _fmt((y1 - y0) * s)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f"<style>{STYLE}</style>"]
    if opts.title:
        out.append(f"<title>{escape(opts.title)}</title>")
    ox, oy = X(0j)
    out.append(f'<line class="axis" x1="0.000" y1="{oy}" x2="{W}" y2="{oy}"/>')
    out.append(f'<line class="axis" x1="{ox}" y1="0.000" x2="{ox}" y2="{H}"/>')
    if G is not None:
        if opts.show_slits:
            for pl in G.slits:
                pts = " ".join(",".join(X(p)) for p in pl)
                out.append(f'<polyline class="slit" points="{pts}"/>')
        for e in G.edges:
            pts = " ".join(",".join(X(p)) for p in e.path.vertices)
            cls = "horizontal" if e.kind == HORIZONTAL else "vertical"
            out.append(f'<polyline class="{cls}" points="{pts}"><title>{cls} {e.weight:.6g}</title></polyline>')
        for v in G.vertices:
            cx, cy = X(v.position)
            if v.on_divisor:
                cls = "vertex branch" if v.is_branch else "vertex critical"
                out.append(f'<circle class="{cls}" cx="{cx}" cy="{cy}" r="3.500"><title>{escape(v.label)} ord {v.ord}</title></circle>')
                if opts.labels:
                    out.append(f'<text x="{_fmt(float(cx) + 5)}" y="{_fmt(float(cy) - 5)}">{escape(v.label)}</text>')
            else:
                out.append(f'<circle class="junction" cx="{cx}" cy="{cy}" r="2.500"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def count_vertex_markers(svg):
    return svg.count('class="vertex ')
