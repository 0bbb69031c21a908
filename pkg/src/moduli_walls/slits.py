"""Slit system and slit-avoiding routing in the x-plane.

The two finite slits run from e_s down to a foot p_s in (-1, 1) and back up
to conj(e_s). A closed loop around such a slit crosses the real axis inside
(-1, 1), where the sextic is negative, and therefore lifts to an even cycle.
Slit B1 first climbs above e2 and only then descends, so the slits are
nested the way the vertical subgraph is: B2 hangs under the arc of B1.
B0 is the pair of real rays (-inf, -1] and [1, inf).

Routes from the base point 1 are shortest paths in a visibility graph whose
nodes are the start, the target and a ring of waypoints around every slit
vertex.
"""

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import PathRoutingFailure

_FEET = ((-0.5, 0.5), (-0.6, 0.2), (-0.2, 0.6), (-0.8, -0.2), (0.2, 0.8))


def _cross(u, v):
    return u.real * v.imag - u.imag * v.real


def segments_intersect(p, q, r, s, eps=1e-12):
    """True if segment [p, q] meets [r, s] at a point interior to [p, q].

    Touching [r, s] at an endpoint of [p, q] does not count.
    """
    d1, d2 = q - p, s - r
    den = _cross(d1, d2)
    if abs(den) < 1e-300:
        if abs(_cross(r - p, d1)) > eps * max(abs(d1), 1.0):
            return False
        # collinear: overlap of projections onto d1
        L = abs(d1) ** 2
        t0 = ((r - p) * np.conj(d1)).real / L
        t1 = ((s - p) * np.conj(d1)).real / L
        lo, hi = min(t0, t1), max(t0, t1)
        return hi > eps and lo < 1 - eps
    t = _cross(r - p, d2) / den
    u = _cross(r - p, d1) / den
    return eps < t < 1 - eps and -eps <= u <= 1 + eps


def point_segment_distance(x, p, q):
    d = q - p
    L = abs(d) ** 2
    if L == 0:
        return abs(x - p)
    t = min(max(((x - p) * np.conj(d)).real / L, 0.0), 1.0)
    return abs(x - (p + t * d))


@dataclass(frozen=True)
class SlitSystem:
    """Slits B1, B2 (upper halves as polylines from e_s to the foot) and feet."""

    B1: tuple
    B2: tuple
    feet: tuple
    far: float = field(default=1e3)

    def closed(self, s):
        """Full mirror-symmetric polyline e_s -> p_s -> conj(e_s)."""
        half = self.B1 if s == 1 else self.B2
        return tuple(half) + tuple(np.conj(half[-2::-1]))

    def all_segments(self):
        segs = []
        for s in (1, 2):
            pts = self.closed(s)
            segs.extend(zip(pts[:-1], pts[1:]))
        segs.append((1.0 + 0j, complex(self.far)))
        segs.append((complex(-self.far), -1.0 + 0j))
        return segs

    def foot_sign(self, x):
        """Sign relating the pants branch of w at real x in (-1, 1) to the
        value continued along the real axis from 1 (one flip per foot passed)."""
        n = sum(1 for p in self.feet if x < p)
        return -1.0 if n % 2 else 1.0


def make_slits(E, feet=None):
    """Build the slit system for a divisor.

    Among a small family of candidate feet and arc heights the one with the
    widest separation between slits and foreign branch points is used. All
    candidates are isotopic, so the choice never changes the cut-plane branch.

    Raises
    ------
    PathRoutingFailure
        If no candidate gives disjoint slits.
    """
    e1, e2 = E.e1, E.e2
    top = max(e1.imag, e2.imag)
    grid = np.linspace(-0.8, 0.8, 9)
    pairs = [feet] if feet is not None else [(p, q) for p in grid for q in grid if q > p]
    best, best_score = None, 0.0
    for m in (0.25 * top + 0.05, 0.5 * top + 0.1):
        T = complex(min(e1.real, e2.real) - m, top + m)
        for p1, p2 in pairs:
            S = SlitSystem((e1, T, complex(p1)), (e2, complex(p2)), (p1, p2))
            sc = _separation(S, E)
            if sc > best_score:
                best, best_score = S, sc
    if best is None or best_score < 1e-3:
        # fallback: straight slits; of two crossing straight slits the pair
        # with swapped feet never crosses, so some assignment always exists
        best, best_score = None, 0.0
        allpairs = [(p, q) for p in grid for q in grid if p != q] if feet is None else pairs
        for p1, p2 in allpairs:
            S = SlitSystem((e1, complex(p1)), (e2, complex(p2)), (p1, p2))
            sc = _separation(S, E)
            if sc > best_score:
                best, best_score = S, sc
    if best is None or best_score < 1e-3:
        raise PathRoutingFailure("could not build disjoint slits for this divisor")
    return best


def _separation(S, E):
    """Smallest gap between the slits and points they must avoid (0 if they meet)."""
    a = list(zip(S.closed(1)[:-1], S.closed(1)[1:]))
    b = list(zip(S.closed(2)[:-1], S.closed(2)[1:]))
    for p, q in a:
        for r, s in b:
            if segments_intersect(p, q, r, s) or segments_intersect(r, s, p, q):
                return 0.0
    gap = np.inf
    for segs, own in ((a, S.closed(1)), (b, S.closed(2))):
        other = S.closed(2) if segs is a else S.closed(1)
        for p, q in segs:
            for r in list(other) + [1.0, -1.0]:
                gap = min(gap, point_segment_distance(r, p, q))
    for p in S.feet:
        gap = min(gap, 1.0 - abs(p))
    return gap


class Router:
    """Shortest slit-avoiding polylines from the base point 1.

    Parameters
    ----------
    slits : SlitSystem
    roots : ndarray
        Branch points; route interiors keep ``clearance`` away from them.
    clearance : float
    """

    def __init__(self, slits, roots, clearance=0.05):
        self.slits = slits
        self.roots = np.asarray(roots)
        self.clearance = clearance
        self.segs = slits.all_segments()
        scale = max(2.0, float(np.max(np.abs(self.roots))) * 1.5)
        pts = []
        for s in (1, 2):
            for v in slits.closed(s):
                for k in range(8):
                    pts.append(v + 2 * clearance * np.exp(1j * np.pi * (k + 0.5) / 4))
            for a, b in zip(slits.closed(s)[:-1], slits.closed(s)[1:]):
                nrm = 1j * (b - a) / abs(b - a)
                for f in (0.25, 0.5, 0.75):
                    for sg in (-1, 1):
                        pts.append(a + f * (b - a) + sg * 2 * clearance * nrm)
        for re in np.linspace(-scale, scale, 9):
            for im in np.linspace(0.0, scale, 6)[1:]:
                pts.append(complex(re, im))
        for r in (-1.0, 1.0):
            for k in range(8):
                pts.append(r + 2 * clearance * np.exp(1j * np.pi * (k + 0.5) / 4))
        for re in (-scale, 0.0, scale):
            for im in (-scale, scale):
                pts.append(complex(re, im))
        # routes stay in the upper half plane; the lower half follows by mirror symmetry
        pts = [p for p in pts if p.imag > 0 and self._free_point(p)]
        self.waypoints = pts

    def _free_point(self, p):
        if np.min(np.abs(self.roots - p)) < self.clearance:
            return False
        return all(point_segment_distance(p, a, b) > 0.5 * self.clearance for a, b in self.segs)

    def visible(self, p, q, end_is_root=False, start_is_root=False):
        for a, b in self.segs:
            if segments_intersect(p, q, a, b):
                return False
        # keep interior away from roots other than endpoints
        for r in self.roots:
            if (start_is_root and abs(r - p) < 1e-14) or (end_is_root and abs(r - q) < 1e-14):
                continue
            if point_segment_distance(r, p, q) < 0.25 * self.clearance:
                return False
        return True

    def _tree(self):
        if getattr(self, "_dist", None) is not None:
            return
        nodes = [1.0 + 0j] + self.waypoints
        n = len(nodes)
        dist = np.full(n, np.inf)
        dist[0] = 0.0
        prev = np.full(n, -1)
        done = np.zeros(n, bool)
        heap = [(0.0, 0)]
        while heap:
            d, i = heapq.heappop(heap)
            if done[i]:
                continue
            done[i] = True
            for j in range(1, n):
                if done[j]:
                    continue
                nd = d + abs(nodes[j] - nodes[i])
                if nd < dist[j] and self.visible(nodes[i], nodes[j], start_is_root=(i == 0)):
                    dist[j] = nd
                    prev[j] = i
                    heapq.heappush(heap, (nd, j))
        self._nodes, self._dist, self._prev = nodes, dist, prev

    def route(self, x, side=None):
        """Polyline from 1 to ``x`` avoiding all slits.

        Parameters
        ----------
        x : complex
            Target in the closed upper half plane.
        side : complex, optional
            For a point on a slit, a direction; the last leg must arrive
            from the half plane ``Re((prev - x) * conj(side)) > 0``.
        """
        x = complex(x)
        if x.imag < 0:
            raise PathRoutingFailure("routes are built in the closed upper half plane only")
        self._tree()
        try:
            return self._route(x, side)
        except PathRoutingFailure:
            d = np.abs(self.roots - x)
            k = int(np.argmin(d))
            if not 0 < d[k] < 2 * self.clearance:
                raise
        # close to a branch point: reach a point further out on the same ray,
        # then run radially inwards (a radial leg cannot cross the root's own slit)
        r = self.roots[k]
        u = (x - r) / abs(x - r)
        for f in (2.0, 3.0, 1.5, 4.0):
            y = r + f * self.clearance * u
            if y.imag < 0 or any(segments_intersect(y, x, a, b) for a, b in self.segs):
                continue
            try:
                return self._route(y, None) + [x]
            except PathRoutingFailure:
                continue
        raise PathRoutingFailure(f"no slit-avoiding route to {x}")

    def _route(self, x, side):
        x_is_root = bool(np.min(np.abs(self.roots - x)) < 1e-14)
        best, arg = np.inf, None
        for i, p in enumerate(self._nodes):
            cand = self._dist[i] + abs(x - p)
            if not np.isfinite(cand) or cand >= best:
                continue
            if side is not None and ((p - x) * np.conj(side)).real <= 0:
                continue
            if abs(p - x) < 1e-15:
                continue
            if self.visible(p, x, end_is_root=x_is_root, start_is_root=(i == 0)):
                best, arg = cand, i
        if arg is None:
            raise PathRoutingFailure(f"no slit-avoiding route to {x}")
        path = [x]
        i = arg
        while i != -1:
            path.append(self._nodes[i])
            i = self._prev[i] if i != 0 else -1
        return path[::-1]
