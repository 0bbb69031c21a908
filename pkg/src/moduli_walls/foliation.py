"""Trajectories of the quadratic differential (d eta)**2 and the embedded graph.

Trajectories are traced in the eta-plane parametrization: a horizontal
trajectory has constant Im eta and moves with d eta / dt = +-1, a vertical
one has constant Re eta and moves with d eta / dt = +-i. Each step is an
RK4 prediction for x followed by an exact re-evaluation of eta by line
quadrature from the previous point and a Newton projection back onto the
isoline. The square root w is carried along the trajectory by exact
continuation, so tracing does not depend on the slit system.
"""

from dataclasses import dataclass, field

import numpy as np

from .abelian import eta, normalize, w_at
from .cells import GraphType, critical_points
from .coordinates import cell_values, classify
from .curve import PlanePath, base_constant, w_on_line
from .errors import TrajectoryStalled, UnsupportedConfiguration
from .quadrature import line_integral

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

__all__ = ["HORIZONTAL", "VERTICAL", "Trajectory", "Vertex", "Edge", "TracedGraph",
           "trace_trajectory", "separatrix_seeds", "build_graph", "classify"]


@dataclass(frozen=True)
class Trajectory:
    """Traced arc with the eta values at its nodes.

    ``end`` is one of ``"zero_set"``, ``"branch_point"``, ``"critical_point"``
    or ``"cap"``; ``end_index`` names the root or critical point reached.
    """

    path: PlanePath
    eta: tuple
    kind: str
    end: str
    end_index: int = -1
    w_end: complex = 0j

    @property
    def start(self):
        return self.path.start

    @property
    def stop(self):
        return self.path.end

    def isoline_error(self):
        e = np.asarray(self.eta)
        part = e.imag if self.kind == HORIZONTAL else e.real
        return float(np.max(np.abs(part - part[0])))


def _q(D, x):
    return x * x + D.a * x + D.b


def _snap_targets(D, crit):
    r = D.roots
    out = []
    for i, p in enumerate(r):
        others = np.delete(r, i)
        out.append(("branch_point", i, p, 0.3 * float(np.min(np.abs(others - p)))))
    for j, c in enumerate(crit):
        d = float(np.min(np.abs(r - c)))
        out.append(("critical_point", j, c, 0.3 * d))
    return out


def _ray_direction(D, p, kind):
    # local isoline through a root: (eta - eta(p))**2 ~ 4 q(p)**2 (x - p) / P'(p)
    r = D.roots
    dP = np.prod(p - r[np.abs(r - p) > 1e-14])
    v = dP / (4.0 * _q(D, p) ** 2)
    return v if kind == HORIZONTAL else -v


def _try_snap(D, x, w, eta_x, kind, u, targets, visited, tol=1e-9):
    heading = u * w / _q(D, x)
    for label, idx, p, rad in targets:
        if (label, idx) in visited or abs(x - p) > rad or abs(x - p) < 1e-15:
            continue
        # the target has to lie ahead of the current heading
        if abs(np.angle((p - x) / heading)) > np.pi / 3:
            continue
        if label == "branch_point":
            val, _ = line_integral(lambda t: _q(D, t), D.roots, x, p, w, end_root=idx)
            ray = _ray_direction(D, p, kind)
            if abs(np.angle((x - p) / ray)) > 0.35:
                continue
        else:
            val, _ = line_integral(lambda t: _q(D, t), D.roots, x, p, w)
        d = complex(val[0])
        along = d / u
        if abs(along.imag) < tol * max(1.0, abs(d)) and along.real > 0:
            return label, idx, p, eta_x + d
    return None


def trace_trajectory(D, start, kind, direction, *, w_start=None, eta_start=None,
                     max_length=20.0, max_steps=20000, step_fraction=0.05,
                     exclude=(), tol=1e-12):
    """Trace a horizontal or vertical trajectory of (d eta)**2 from ``start``.

    Parameters
    ----------
    D : DistinguishedDifferential
    start : complex
    kind : {"horizontal", "vertical"}
    direction : {+1, -1}
        Horizontal: +1 increases the width W = |Re eta|, -1 decreases it.
        Vertical: the sign of d(Im eta)/dt.
    w_start, eta_start : complex, optional
        Values of w and eta at ``start``; default to the cut-plane values.
    max_length : float
        Cap on the eta-length of the arc.
    exclude : iterable of (label, index)
        Snap targets to ignore, typically the vertex the arc starts from.

    A start at a branch point follows the single ray of the requested kind
    leaving it; ``direction`` is then ignored.

    Returns
    -------
    Trajectory
        Stops on the zero set of W (horizontal descent only), at a branch
        point, at a critical point, or at the length cap.

    Raises
    ------
    TrajectoryStalled
        If the step size underflows.
    """
    if kind not in (HORIZONTAL, VERTICAL):
        raise ValueError(f"unknown trajectory kind {kind!r}")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    E = D.E
    roots = D.roots
    x = complex(start)
    head = []
    at_root = np.flatnonzero(np.abs(roots - x) < 1e-12)
    if at_root.size:
        # a branch point emits a single ray of each kind; follow it outwards
        p = complex(roots[at_root[0]])
        ray = _ray_direction(D, p, kind)
        x = p + 1e-6 * max(1.0, abs(p)) * ray / abs(ray)
        ep = eta(D, p)
        # either sheet traces the same curve; take w = c sqrt(x - p) ... locally
        k = int(at_root[0])
        c = np.sqrt(np.prod(p - np.delete(roots, k)))
        val, w = line_integral(lambda t: _q(D, t), roots, p, x, c, start_root=k)
        w, e = complex(w), ep + complex(val[0])
        d = e - ep
        direction = int(np.sign(d.imag if kind == VERTICAL else abs(e.real) - abs(ep.real))) or 1
        head = [(p, ep)]
    else:
        w = complex(w_at(E, x) if w_start is None else w_start)
        e = complex(eta(D, x) if eta_start is None else eta_start)
    if kind == HORIZONTAL:
        sgn = 1.0 if e.real >= 0 else -1.0
        u = direction * sgn + 0j
        level = e.imag
    else:
        u = 1j * direction
        level = e.real
    crit = critical_points(D)
    crit_pts = np.array([crit.z1, crit.z2])
    targets = _snap_targets(D, crit_pts)
    visited = set(exclude)
    singular = np.concatenate([roots, crit_pts])
    if head:
        level = head[0][1].imag if kind == HORIZONTAL else head[0][1].real
    xs, es = [q for q, _ in head] + [x], [v for _, v in head] + [e]
    travelled = 0.0
    descending_h = kind == HORIZONTAL and direction == -1

    def vel(y, wy):
        return u * wy / _q(D, y)

    for _ in range(max_steps):
        snap = _try_snap(D, x, w, e, kind, u, targets, visited)
        if snap is not None:
            label, idx, p, ep = snap
            xs.append(complex(p))
            es.append(ep)
            return Trajectory(PlanePath(tuple(xs)), tuple(es), kind, label, idx, 0j)
        dist = float(np.min(np.abs(singular - x)))
        dist = max(dist, 1e-300)
        speed = abs(w / _q(D, x))
        h = step_fraction * dist / speed
        h = min(h, 0.05, max_length - travelled)
        final = False
        if descending_h and abs(e.real) <= h:
            h = abs(e.real)
            final = True
        if step_fraction * dist < 1e-13 * max(1.0, abs(x)):
            if travelled >= max_length - 1e-12:
                break
            raise TrajectoryStalled(f"step underflow at x = {x}")
        # RK4 predictor with w continued on rays out of x
        def wf(y):
            return complex(w_on_line(roots, x, w, y))

        k1 = vel(x, w)
        y = x + 0.5 * h * k1
        k2 = vel(y, wf(y))
        y = x + 0.5 * h * k2
        k3 = vel(y, wf(y))
        y = x + h * k3
        k4 = vel(y, wf(y))
        xn = x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        target = e + u * h
        for _ in range(8):
            val, wn = line_integral(lambda t: _q(D, t), roots, x, xn, w)
            en = e + complex(val[0])
            if final:
                err = target - en
            elif kind == HORIZONTAL:
                err = 1j * (level - en.imag)
            else:
                err = level - en.real
            if abs(err) < tol:
                break
            xn = xn + err * wn / _q(D, xn)
        x, w, e = xn, complex(wn), en
        xs.append(x)
        es.append(e)
        travelled += h
        visited.clear()
        if final:
            return Trajectory(PlanePath(tuple(xs)), tuple(es), kind, "zero_set", -1, w)
        if travelled >= max_length - 1e-12:
            break
    return Trajectory(PlanePath(tuple(xs)), tuple(es), kind, "cap", -1, w)


def separatrix_seeds(D, c, w_c, eta_c, kind=HORIZONTAL, descending=True, radius=1e-4, order=None):
    """Seed points on the separatrices leaving the critical point ``c``.

    Uses the local form eta - eta(c) ~ A (x - c)**(m+1) / ((m+1) w(c)), where
    q ~ A (x - c)**m, so a zero of order m has m + 2 sectors and m + 1
    separatrices of each orientation. Returns a list of (x, w, eta) with
    eta evaluated exactly by quadrature from ``c``. ``order`` overrides
    the zero order read from the discriminant (use 2 on the wall).
    """
    cs = critical_points(D)
    double = cs.kind == "double" if order is None else order == 2
    m = 2 if double else 1
    if double:
        A = 1.0
    else:
        other = cs.z2 if abs(c - cs.z1) < abs(c - cs.z2) else cs.z1
        A = c - other
    sgn = 1.0 if eta_c.real >= 0 else -1.0
    if kind == HORIZONTAL:
        target = -sgn if descending else sgn
    else:
        target = -1j if descending else 1j
    base = target * (m + 1) * w_c / A
    out = []
    for k in range(m + 1):
        root = np.abs(base) ** (1.0 / (m + 1)) * np.exp(1j * (np.angle(base) + 2 * np.pi * k) / (m + 1))
        x = c + radius * root / abs(root)
        val, wx = line_integral(lambda t: _q(D, t), D.roots, c, x, w_c)
        ex = eta_c + complex(val[0])
        # project onto the isoline through c
        for _ in range(6):
            if kind == HORIZONTAL:
                err = 1j * (eta_c.imag - ex.imag)
            else:
                err = eta_c.real - ex.real
            if abs(err) < 1e-15:
                break
            x = x + err * wx / _q(D, x)
            val, wx = line_integral(lambda t: _q(D, t), D.roots, c, x, w_c)
            ex = eta_c + complex(val[0])
        out.append((x, complex(wx), ex))
    return out


# ---------------------------------------------------------------- graph


@dataclass(frozen=True)
class Vertex:
    position: complex
    ord: int
    is_branch: bool
    label: str
    multiplicity: int
    on_divisor: bool = True

    def to_json(self):
        return {"label": self.label, "position": [self.position.real, self.position.imag],
                "ord": self.ord, "multiplicity": self.multiplicity,
                "is_branch": self.is_branch, "on_divisor": self.on_divisor}


@dataclass(frozen=True)
class Edge:
    """Graph edge; horizontal edges point from lower to higher width."""

    source: int
    target: int
    kind: str
    weight: float
    path: PlanePath

    def to_json(self):
        return {"source": self.source, "target": self.target, "kind": self.kind,
                "weight": self.weight,
                "path": [[p.real, p.imag] for p in self.path.vertices]}


@dataclass(frozen=True)
class TracedGraph:
    kind: GraphType
    vertices: tuple
    edges: tuple
    weights: dict = field(default_factory=dict)
    slits: tuple = ()

    def degrees(self, i):
        dv = sum((e.source == i) + (e.target == i) for e in self.edges if e.kind == VERTICAL)
        din = sum(e.target == i for e in self.edges if e.kind == HORIZONTAL)
        return dv, din

    def combinatorial_ord(self, i):
        dv, din = self.degrees(i)
        return dv + 2 * din - 2

    def ord_mismatches(self):
        """Vertices whose combinatorial ord differs from the analytic multiplicity."""
        return [v.label for i, v in enumerate(self.vertices)
                if self.combinatorial_ord(i) != v.multiplicity]

    def to_json(self):
        return {"type": self.kind.value, "vertices": [v.to_json() for v in self.vertices],
                "edges": [e.to_json() for e in self.edges], "weights": dict(self.weights)}


class _Builder:
    def __init__(self, D):
        self.D = D
        self.vertices = []
        self.edges = []

    def vertex(self, pos, label, multiplicity, is_branch=False, on_divisor=True, tol=1e-7):
        for i, v in enumerate(self.vertices):
            if abs(v.position - pos) < tol:
                return i
        self.vertices.append(Vertex(complex(pos), 0, is_branch, label, multiplicity, on_divisor))
        return len(self.vertices) - 1

    def edge(self, a, b, kind, weight, path):
        self.edges.append(Edge(a, b, kind, float(weight), path))

    def finish(self, kind, weights, slits):
        g = TracedGraph(kind, tuple(self.vertices), tuple(self.edges), weights, slits)
        verts = tuple(Vertex(v.position, g.combinatorial_ord(i), v.is_branch, v.label,
                             v.multiplicity, v.on_divisor) for i, v in enumerate(g.vertices))
        return TracedGraph(kind, verts, g.edges, weights, slits)


_ROOT_LABELS = ("1", "-1", "e1", "conj(e1)", "e2", "conj(e2)")


def build_graph(D, kind=None):
    """Trace the critical graph of the cell containing ``D``.

    Horizontal separatrices are traced downhill from every critical point
    until they meet the zero set of W, then the vertical arcs are traced
    from each landing point to the branch points in both directions. The
    segment [-1, 1] is vertical and is added directly.

    Parameters
    ----------
    D : DistinguishedDifferential or BranchDivisor
    kind : GraphType, optional
        Defaults to ``classify(D)``.

    Raises
    ------
    UnsupportedConfiguration
        For configurations outside the three supported cells.
    """
    if not hasattr(D, "a"):
        D = normalize(D, check=False)
    E = D.E
    kind = classify(D) if kind is None else GraphType(kind)
    if kind is GraphType.Unsupported:
        raise UnsupportedConfiguration("graph assembly needs a GammaPlus, GammaZero or GammaMinus cell")
    coords, ex = cell_values(E, kind, D)
    roots = D.roots
    B = _Builder(D)
    for i, r in enumerate(roots):
        B.vertex(r, _ROOT_LABELS[i], -1, is_branch=True)
    cs = critical_points(D)
    if kind is GraphType.GammaZero:
        z = complex(ex["z"])
        crit = [(z, complex(ex["eta_z"]), 4, "z")]
    elif kind is GraphType.GammaPlus:
        ez = complex(ex["eta_z"])
        crit = [(cs.z1, ez, 2, "z+"), (cs.z2, -np.conj(ez), 2, "z-")]
    else:
        za, zb = ex["z"]
        ea, eb = ex["eta_z"]
        crit = [(complex(za), complex(ea), 2, "za"), (complex(zb), complex(eb), 2, "zb")]
    crit_idx = {}
    for c, _, mult, lab in crit:
        crit_idx[lab] = B.vertex(c, lab, mult)
    landings = []
    for c, ec, _, lab in crit:
        wc = w_at(E, c) if abs(c.imag) > 0 or c.real <= 1 else complex(
            line_integral(lambda t: _q(D, t), roots, 1.0, c, base_constant(roots), start_root=0)[1])
        for x0, w0, e0 in separatrix_seeds(D, c, wc, ec, order=mult // 2):
            tr = trace_trajectory(D, x0, HORIZONTAL, -1, w_start=w0, eta_start=e0)
            pts = (c,) + tr.path.vertices
            etas = (ec,) + tr.eta
            path = PlanePath(pts)
            if tr.end == "branch_point":
                j = tr.end_index
            elif tr.end == "critical_point":
                cc = cs.z1 if tr.end_index == 0 else cs.z2
                j = B.vertex(cc, "", 0)
            elif tr.end == "zero_set":
                j = B.vertex(tr.stop, f"v{len(landings)}", 0, on_divisor=False)
                landings.append((j, tr.stop, tr.w_end, etas[-1]))
            else:
                raise TrajectoryStalled(f"separatrix from {lab} did not terminate")
            dW = abs(abs(etas[0].real) - abs(etas[-1].real))
            B.edge(j, crit_idx[lab], HORIZONTAL, dW, path.reversed())
    # vertical arcs from landing points off the real axis
    real_landings = []
    for j, p, wp, ep in landings:
        if abs(p.imag) < 1e-9 and -1 < p.real < 1:
            if all(j != r[0] for r in real_landings):
                real_landings.append((j, p.real, ep))
            continue
        for d in (1, -1):
            tr = trace_trajectory(D, p, VERTICAL, d, w_start=wp, eta_start=ep)
            if tr.end != "branch_point":
                raise TrajectoryStalled(f"vertical arc from {p} did not reach a branch point")
            B.edge(j, tr.end_index, VERTICAL, abs(tr.eta[-1].imag - tr.eta[0].imag), tr.path)
    # the segment [-1, 1], split at landing points
    eta_m1 = eta(D, -1.0)
    stops = sorted([(1.0, 0, 0j)] + [(x, j, e) for j, x, e in real_landings]
                   + [(-1.0, 1, eta_m1)], key=lambda t: -t[0])
    for (xa, ja, ea), (xb, jb, eb) in zip(stops[:-1], stops[1:]):
        length = abs(abs(eb.imag) - abs(ea.imag))
        B.edge(ja, jb, VERTICAL, length, PlanePath((complex(xa), complex(xb))))
    weights = _graph_weights(B, kind)
    from .abelian import _slits
    S = _slits(E)
    return B.finish(kind, weights, (S.closed(1), S.closed(2)))


def _graph_weights(B, kind):
    V = B.vertices
    idx = {v.label: i for i, v in enumerate(V)}

    def vlen(target_label):
        t = idx[target_label]
        best = [e for e in B.edges if e.kind == VERTICAL and e.target == t
                and not V[e.source].is_branch and V[e.source].position.imag > 0]
        return best[0].weight

    def hin(target_label, source_pred):
        t = idx[target_label]
        es = [e for e in B.edges if e.kind == HORIZONTAL and e.target == t and source_pred(V[e.source])]
        return es[0].weight

    upper_regular = lambda v: not v.on_divisor and v.position.imag > 1e-9
    out = {"H1": vlen("e1"), "H2": vlen("e2")}
    if kind is GraphType.GammaZero:
        out["W"] = hin("z", upper_regular)
    elif kind is GraphType.GammaPlus:
        out["W"] = hin("z+", upper_regular)
        j0 = [i for i, v in enumerate(V) if not v.on_divisor and abs(v.position.imag) < 1e-9][0]
        out["H0"] = [e.weight for e in B.edges if e.kind == VERTICAL and e.source == 0 and e.target == j0][0]
    else:
        out["W1"] = hin("zb", upper_regular)
        out["W2"] = hin("za", lambda v: v.label == "1")
    return out
