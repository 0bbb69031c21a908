"""The distinguished differential, its abelian integral and periods.

The differential is ``(x**2 + a x + b) dx / w`` with real ``a, b`` chosen so
that every period is purely imaginary. Its integral ``eta`` is taken from the
branch point 1 on the sheet where ``w > 0`` on (1, inf), inside the plane cut
along the slit system of :mod:`moduli_walls.slits`.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curve import BranchDivisor, base_constant, w_base_real
from .errors import DegenerateSystem, NoConvergence
from .quadrature import circle_integral, line_integral, polyline_integral
from .slits import Router, make_slits, point_segment_distance


@dataclass(frozen=True)
class DistinguishedDifferential:
    """Real differential (x**2 + a x + b) dx / w with imaginary periods."""

    E: BranchDivisor
    a: float
    b: float
    period_residuals: tuple = field(default=(), compare=False)

    @property
    def roots(self):
        return self.E.roots

    @property
    def coefficients(self):
        return np.array([1.0, self.a, self.b])

    def numerator(self, x):
        x = np.asarray(x, complex)
        return (x + self.a) * x + self.b

    def to_json(self):
        return {
            "divisor": self.E.to_json(),
            "a": self.a,
            "b": self.b,
            "period_residuals": [abs(p) for p in self.period_residuals],
        }


def _monomials(x):
    return np.vstack([x * x, x, np.ones_like(x)])


def _uhp_path(E, e):
    """Straight path 1 -> e, bent upward if it grazes another branch point."""
    roots = E.roots
    others = [r for r in roots if abs(r - e) > 1e-14 and abs(r - 1.0) > 1e-14]
    mid = 0.5 * (1.0 + e)
    if min(point_segment_distance(r, 1.0 + 0j, e) for r in others) > 1e-2:
        return [1.0 + 0j, mid, e]
    bump = mid + 0.5j * max(abs(e - 1.0), 0.1)
    return [1.0 + 0j, bump, e]


def _root_index(roots, x):
    d = np.abs(roots - x)
    i = int(np.argmin(d))
    return i if d[i] < 1e-14 else None


def normalize(E, *, check=True, tol=1e-13):
    """Solve for the real coefficients (a, b) of the distinguished differential.

    The conditions are Re of the integral from 1 to e_s along an upper
    half-plane path, s = 1, 2. Each equals a quarter of minus the period over
    the even loop that wraps e_s and conj(e_s) through (-1, 1), so they are
    equivalent to the vanishing of the even periods.

    Parameters
    ----------
    E : BranchDivisor
    check : bool
        Also integrate over the two even contours and store the residual
        periods.

    Raises
    ------
    DegenerateSystem
        If the 2x2 system has condition number above 1e12.
    """
    roots = E.roots
    c = base_constant(roots)
    rows, rhs = [], []
    for s, e in ((1, E.e1), (2, E.e2)):
        pts = _uhp_path(E, e)
        val, _ = polyline_integral(_monomials, roots, pts, c, start_root=0,
                                   end_root=2 if s == 1 else 4, tol=tol)
        rows.append([val[1].real, val[2].real])
        rhs.append(-val[0].real)
    A = np.array(rows)
    if not np.all(np.isfinite(A)) or np.linalg.cond(A) > 1e12:
        raise DegenerateSystem("normalization system is singular (e1 ~ e2 or e_s ~ +-1)")
    a, b = np.linalg.solve(A, np.array(rhs))
    D = DistinguishedDifferential(E, float(a), float(b))
    if check:
        res = tuple(period(D, even_contour(E, s)) for s in (1, 2))
        D = DistinguishedDifferential(E, D.a, D.b, res)
    return D


# ---------------------------------------------------------------- contours


@dataclass(frozen=True)
class Contour:
    """Closed integration contour.

    ``kind`` is ``"polygon"`` (``vertices`` closed, ``w_start`` at the first
    vertex) or ``"circle"`` (``center``, ``radius`` and ``w_start`` at the
    center, no root inside). Orientation is counterclockwise.
    """

    kind: str
    w_start: complex
    tag: str = "custom"
    vertices: tuple = ()
    center: complex = 0j
    radius: float = 0.0

    def conjugate(self):
        """Mirror image, reversed so that it stays counterclockwise."""
        if self.kind == "circle":
            return Contour("circle", -np.conj(self.w_start), self.tag, center=np.conj(self.center),
                           radius=self.radius)
        v = np.conj(self.vertices[::-1])
        return Contour("polygon", -np.conj(self.w_start), self.tag, vertices=tuple(v))


def sausage(points, delta, cap_n=8):
    """Counterclockwise polygon at distance ``delta`` around an open polyline.

    Returns the vertex list (closed) and the index of the right-side vertex
    attached to each input point.
    """
    P = np.asarray(points, complex)
    d = np.diff(P)
    d = d / np.abs(d)
    nrm = 1j * d
    n = P.size
    m = np.empty(n, complex)
    m[0], m[-1] = nrm[0], nrm[-1]
    for k in range(1, n - 1):
        s = nrm[k - 1] + nrm[k]
        denom = 1.0 + (nrm[k - 1] * np.conj(nrm[k])).real
        m[k] = s / max(denom, 0.2)
    R = P - delta * m
    L = P + delta * m
    th = np.linspace(0.0, np.pi, cap_n + 1)[1:-1]
    cap_end = P[-1] + delta * (-nrm[-1] * np.cos(th) + d[-1] * np.sin(th))
    cap_start = P[0] + delta * (nrm[0] * np.cos(th) - d[0] * np.sin(th))
    loop = np.concatenate([R, cap_end, L[::-1], cap_start, R[:1]])
    return loop


def even_contour(E, s, clearance=None):
    """Counterclockwise loop around the closed slit B_s.

    The loop starts where it crosses the real axis west of the foot of B_s,
    and ``w_start`` is the value of the cut-plane branch there.
    """
    S = _slits(E)
    e = E.e1 if s == 1 else E.e2
    if clearance is None:
        clearance = max(0.05 * abs(e - e.conjugate()), 1e-2)
        clearance = min(clearance, 0.25 * _slit_gap(E, S, s))
    pts = S.closed(s)
    loop = sausage(pts, clearance)
    mid = len(pts) // 2
    loop = np.concatenate([loop[mid:-1], loop[:mid + 1]])
    x0 = loop[0]
    x0 = complex(x0.real, 0.0)
    loop[0] = loop[-1] = x0
    w0 = complex(w_base_real(E.roots, x0.real)) * S.foot_sign(x0.real)
    return Contour("polygon", w0, f"C{s}", vertices=tuple(loop))


def odd_contour(E, s, crossing=None, clearance=None):
    """Counterclockwise loop around e_s and conj(e_s) crossing the real axis
    at ``crossing`` > 1 (an odd cycle). Its period is imaginary but nonzero."""
    e = E.e1 if s == 1 else E.e2
    if crossing is None:
        crossing = max(abs(E.e1), abs(E.e2), 1.0) + 0.5
    pts = [e, complex(crossing), e.conjugate()]
    if clearance is None:
        clearance = max(0.05 * abs(e - e.conjugate()), 1e-2)
    loop = sausage(pts, clearance)
    x0 = loop[0]
    w0 = complex(np.sqrt(np.prod(x0 - E.roots)))
    return Contour("polygon", w0, "custom", vertices=tuple(loop))


def segment_contour(E, p, q, clearance=0.02):
    """Counterclockwise loop around the straight segment from p to q."""
    loop = sausage([p, q], clearance)
    w0 = complex(np.sqrt(np.prod(loop[0] - E.roots)))
    return Contour("polygon", w0, "custom", vertices=tuple(loop))


def big_contour(E, radius=None, n=64):
    """Counterclockwise polygon enclosing all six branch points.

    Starts on the positive real axis, where the base sheet has ``w > 0``.
    """
    if radius is None:
        radius = 2.0 * max(np.max(np.abs(E.roots)), 1.0)
    th = 2 * np.pi * np.arange(n + 1) / n
    v = radius * np.exp(1j * th)
    v[0] = v[-1] = radius
    w0 = np.sqrt(np.prod(radius - E.roots).real)
    return Contour("polygon", complex(w0), "custom", vertices=tuple(v))


def circle_contour(D, center, radius, tag="C"):
    """Circle without roots inside; ``w`` at its center taken from the cut plane."""
    wc = w_at(D.E, center)
    return Contour("circle", wc, tag, center=complex(center), radius=float(radius))


def _slit_gap(E, S, s):
    other = E.e2 if s == 1 else E.e1
    pts = S.closed(s)
    dmin = np.inf
    for p, q in zip(pts[:-1], pts[1:]):
        for r in (other, np.conj(other), 1.0, -1.0):
            dmin = min(dmin, point_segment_distance(r, p, q))
    opts = S.closed(2 if s == 1 else 1)
    for p, q in zip(pts[:-1], pts[1:]):
        for r in opts:
            dmin = min(dmin, point_segment_distance(r, p, q))
    return dmin


def period(D, contour, g=None, tol=1e-13):
    """Integral of ``g(x) dx / w`` (default: the numerator of ``D``) over a contour."""
    if g is None:
        g = D.numerator
    roots = D.roots if hasattr(D, "roots") else D.E.roots
    if contour.kind == "circle":
        return circle_integral(g, roots, contour.center, contour.w_start, contour.radius, tol=tol)[0]
    val, w_end = polyline_integral(g, roots, list(contour.vertices), contour.w_start, tol=tol)
    if abs(w_end - contour.w_start) > 1e-6 * abs(contour.w_start):
        raise NoConvergence("w did not return to its start value around the contour")
    return complex(np.atleast_1d(val)[0])


# ---------------------------------------------------------------- eta and W


@lru_cache(maxsize=256)
def _slits(E):
    return make_slits(E)


@lru_cache(maxsize=256)
def _router(E):
    return Router(_slits(E), E.roots, clearance=_clearance(E))


def _clearance(E):
    r = E.roots
    dmin = min(abs(r[i] - r[j]) for i in range(6) for j in range(i + 1, 6))
    return float(min(0.05, 0.2 * dmin))


def route(E, x, side=None):
    """Slit-avoiding polyline from 1 to ``x`` in the closed upper half plane."""
    return _router(E).route(x, side)


def _path_integral(D, pts, g=None, tol=1e-13):
    roots = D.roots
    if g is None:
        g = D.numerator
    end = _root_index(roots, pts[-1])
    val, w = polyline_integral(g, roots, pts, base_constant(roots), start_root=0, end_root=end, tol=tol)
    return complex(np.atleast_1d(val)[0]), w


def eta(D, x, side=None, tol=1e-13):
    """Abelian integral from the base point 1 to ``x`` in the cut plane.

    Points on the real axis get their limit from the upper half plane; points
    of the lower half plane use ``eta(conj x) = -conj(eta(x))``.

    Parameters
    ----------
    D : DistinguishedDifferential
    x : complex
    side : complex, optional
        For points on a finite slit, a direction from which to approach.
    """
    x = complex(x)
    if abs(x - 1.0) < 1e-15:
        return 0j
    if x.imag < 0:
        s = None if side is None else np.conj(side)
        return -np.conj(eta(D, np.conj(x), s, tol))
    if x.imag == 0 and x.real > 1:
        return _path_integral(D, [1.0 + 0j, x], tol=tol)[0]
    return _path_integral(D, route(D.E, x, side), tol=tol)[0]


def width(D, x):
    """Width function |Re eta(x)|."""
    return abs(eta(D, x).real)


def w_at(E, x, side=None):
    """Cut-plane branch of ``w`` at a point that is not a branch point."""
    x = complex(x)
    roots = E.roots
    if x.imag < 0:
        s = None if side is None else np.conj(side)
        return -np.conj(w_at(E, np.conj(x), s))
    c = base_constant(roots)
    if x.imag == 0 and x.real > 1:
        pts = [1.0 + 0j, x]
    else:
        pts = route(E, x, side)
    w = None
    a = pts[0]
    for i, b in enumerate(pts[1:]):
        _, w = line_integral(lambda t: np.zeros_like(t), roots, a, b, c if i == 0 else w,
                             start_root=0 if i == 0 else None)
        a = b
    return w


def bank_values(D, s, t):
    """One-sided limits of eta on slit B_s at the point with parameter ``t``.

    ``t`` in (0, 1) runs along the upper half of the slit from e_s to its
    foot. For ``s = 0`` the point is ``t`` itself on a real ray. Returns
    (left, right) with left meaning the side with larger real part for
    the finite slits and the upper side for the rays.
    """
    if s == 0:
        x = complex(t)
        up = eta(D, x)
        down = -np.conj(up)  # mirror limit from below
        return up, down
    S = _slits(D.E)
    half = np.asarray(S.B1 if s == 1 else S.B2)
    seglen = np.abs(np.diff(half))
    pos = t * seglen.sum()
    k = int(np.searchsorted(np.cumsum(seglen), pos))
    k = min(k, seglen.size - 1)
    loc = pos - (np.cumsum(seglen)[k] - seglen[k])
    d = (half[k + 1] - half[k]) / seglen[k]
    x = half[k] + d * loc
    normal = 1j * d
    east = normal if normal.real >= 0 else -normal
    return eta(D, x, side=east), eta(D, x, side=-east)
