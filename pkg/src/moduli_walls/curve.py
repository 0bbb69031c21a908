"""The curve family w**2 = (x**2 - 1)(x - e1)(x - conj e1)(x - e2)(x - conj e2).

Roots are always stored in the fixed order ``[1, -1, e1, conj(e1), e2,
conj(e2)]`` so that index 0 is the base point of every abelian integral.

The square root ``w`` is continued along straight segments in closed form:
for a segment from ``a`` to ``x`` that meets no root,

    w(x) = w(a) * prod_k sqrt((x - r_k) / (a - r_k))

with the principal square root. Each ratio traces a straight segment that
starts at 1 and only reaches the negative axis if the segment passes
through ``r_k``, so every factor is continuous.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentStart, PathTooCloseToBranchPoint, ValidationError

BASE_INDEX = 0


@dataclass(frozen=True)
class BranchDivisor:
    """The two free branch points in the upper half plane.

    The fixed pair +1, -1 is implicit.
    """

    e1: complex
    e2: complex

    def __post_init__(self):
        e1, e2 = complex(self.e1), complex(self.e2)
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)
        if not (np.isfinite(e1) and np.isfinite(e2)):
            raise ValidationError("branch points must be finite")
        if e1.imag <= 0 or e2.imag <= 0:
            raise ValidationError("branch points must lie in the upper half plane")
        if abs(e1 - e2) < 1e-12:
            raise ValidationError("e1 and e2 coincide")

    @property
    def roots(self):
        """Array of the six branch points in canonical order."""
        e1, e2 = self.e1, self.e2
        return np.array([1.0, -1.0, e1, e1.conjugate(), e2, e2.conjugate()], complex)

    def as_vector(self):
        """Real 4-vector (Re e1, Im e1, Re e2, Im e2)."""
        return np.array([self.e1.real, self.e1.imag, self.e2.real, self.e2.imag])

    @classmethod
    def from_vector(cls, v):
        return cls(complex(v[0], v[1]), complex(v[2], v[3]))

    def swapped(self):
        return BranchDivisor(self.e2, self.e1)

    def conjugate_pair(self, s):
        """Return (e_s, conj e_s) for s in {1, 2}."""
        e = self.e1 if s == 1 else self.e2
        return e, e.conjugate()

    def to_json(self):
        return {"e1": [self.e1.real, self.e1.imag], "e2": [self.e2.real, self.e2.imag]}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(complex(*obj["e1"]), complex(*obj["e2"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed divisor: {obj!r}") from exc


def sextic(E, x):
    """Evaluate (x**2 - 1)(x - e1)(x - conj e1)(x - e2)(x - conj e2)."""
    x = np.asarray(x, complex)
    out = np.ones_like(x)
    for r in E.roots:
        out = out * (x - r)
    return out


def sextic_coefficients(E):
    """Monomial coefficients of the sextic, highest degree first (real)."""
    return np.real(np.poly(E.roots))


def base_constant(roots):
    """Constant c with w = c*sqrt(x - 1)*(1 + O(x - 1)) and c > 0.

    This fixes the sheet: w is positive on (1, inf).
    """
    return float(np.sqrt(np.prod(1.0 - roots[1:]).real))


def w_on_line(roots, a, wa, x, start_root=None):
    """Continue ``w`` from ``a`` to points ``x`` on straight rays out of ``a``.

    Parameters
    ----------
    roots : ndarray of complex, shape (6,)
    a : complex
        Start of the segment.
    wa : complex
        ``w(a)``, or the constant ``c`` of ``w = c*sqrt(x - a)*...`` when ``a`` is
        the root with index ``start_root``.
    x : array_like
        End points. The segments ``[a, x]`` must not contain other roots.
    """
    x = np.asarray(x, complex)
    d = x[..., None] - roots
    ratio = d / (a - np.where(np.arange(roots.size) == start_root, np.nan, roots))
    if start_root is not None:
        ratio[..., start_root] = 1.0
        return wa * np.sqrt(x - a) * np.prod(np.sqrt(ratio), axis=-1)
    return wa * np.prod(np.sqrt(ratio), axis=-1)


def w_base_real(roots, x):
    """Value of w at real x in (-1, 1) continued along the real axis from 1.

    The approach is from the upper half plane, so the value is ``1j`` times
    a positive multiple of sqrt(1 - x).
    """
    x = np.asarray(x, float)
    c = base_constant(roots)
    ratio = (x[..., None] - roots[1:]) / (1.0 - roots[1:])
    return 1j * c * np.sqrt(1.0 - x) * np.prod(np.sqrt(ratio), axis=-1)


@dataclass(frozen=True)
class PlanePath:
    """Polyline in the x-plane given by its vertices."""

    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))
        if len(self.vertices) < 1:
            raise ValidationError("a path needs at least one vertex")

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    @property
    def closed(self):
        return len(self.vertices) > 2 and abs(self.vertices[0] - self.vertices[-1]) < 1e-14

    def segments(self):
        v = self.vertices
        return list(zip(v[:-1], v[1:]))

    def conjugate(self):
        return PlanePath(tuple(np.conj(self.vertices)))

    def reversed(self):
        return PlanePath(tuple(reversed(self.vertices)))

    def sample(self, n_per_segment):
        """Points along the path, ``n_per_segment`` steps on every segment."""
        pts = [self.vertices[0]]
        for a, b in self.segments():
            t = np.arange(1, n_per_segment + 1) / n_per_segment
            pts.extend(a + (b - a) * t)
        return np.array(pts)

    def length(self):
        return float(sum(abs(b - a) for a, b in self.segments()))


def continue_w(E, path, w_start, *, nodes_per_segment=32, exclusion=1e-9, max_halvings=40):
    """Continue ``w`` along a path by nearest-sign tracking.

    At every node the sign of sqrt(sextic) is the one closest to the previous
    value. A step is halved until consecutive values differ in argument by
    less than half of the pi/2 ambiguity threshold, i.e. ``pi/4``.

    Parameters
    ----------
    E : BranchDivisor
    path : PlanePath
    w_start : complex
        Must satisfy ``w_start**2 == sextic(E, path.start)`` to 1e-12 relative.
    nodes_per_segment : int
        Initial number of steps per segment.
    exclusion : float
        Nodes closer than this to a branch point raise
        :class:`PathTooCloseToBranchPoint`.

    Returns
    -------
    complex
    """
    p0 = complex(sextic(E, path.start))
    if abs(w_start * w_start - p0) > 1e-12 * max(abs(p0), 1e-300):
        raise InconsistentStart("w_start**2 does not match sextic at the start point")
    roots = E.roots
    w = complex(w_start)
    for a, b in path.segments():
        t_prev = 0.0
        for t in np.linspace(0.0, 1.0, nodes_per_segment + 1)[1:]:
            w, t_prev = _track_step(roots, a, b, t_prev, t, w, exclusion, max_halvings)
    return w


def _track_step(roots, a, b, t0, t1, w, exclusion, max_halvings):
    stack = [t1]
    t_cur = t0
    depth = 0
    while stack:
        t = stack[-1]
        x = a + (b - a) * t
        if np.min(np.abs(x - roots)) < exclusion:
            raise PathTooCloseToBranchPoint(f"node {x} within {exclusion} of a branch point")
        s = np.sqrt(np.prod(x - roots))
        cand = s if abs(s - w) <= abs(s + w) else -s
        if w == 0 or abs(np.angle(cand / w)) < 0.25 * np.pi:
            w = cand
            t_cur = t
            stack.pop()
            depth = max(depth - 1, 0)
        else:
            depth += 1
            if depth > max_halvings:
                raise PathTooCloseToBranchPoint("step halving limit reached")
            stack.append(0.5 * (t_cur + t))
    return w, t_cur
