"""Adaptive Gauss-Legendre quadrature for differentials g(x) dx / w.

Every differential used in the package is written as ``g(x) dx / w`` with
``g`` analytic at the branch points. When a segment starts or ends at a
branch point ``p`` the substitution ``x = p + (b - p) s**2`` turns the
inverse square root into a smooth integrand. The factor ``s`` coming from
``dx`` and the factor ``s`` inside ``w`` are cancelled analytically, so no
difference ``x - p`` is ever formed near the endpoint.
"""

import numpy as np

from .errors import NoConvergence

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(32)
_NODES = 0.5 * (_NODES + 1.0)
_WEIGHTS = 0.5 * _WEIGHTS

DEFAULT_TOL = 1e-13
DEFAULT_DEPTH = 14


def _adaptive(f, tol, max_depth):
    """Integrate vector-valued ``f`` over [0, 1] by interval halving."""

    def est(s0, s1):
        s = s0 + (s1 - s0) * _NODES
        return f(s) @ ((s1 - s0) * _WEIGHTS)

    whole = est(0.0, 1.0)
    total = np.zeros_like(whole)
    stack = [(0.0, 1.0, whole, 0)]
    scale = max(1.0, float(np.max(np.abs(whole))))
    while stack:
        s0, s1, val, depth = stack.pop()
        m = 0.5 * (s0 + s1)
        left, right = est(s0, m), est(m, s1)
        err = float(np.max(np.abs(left + right - val)))
        if err <= tol * scale:
            total = total + left + right
            continue
        if depth >= max_depth:
            raise NoConvergence(f"quadrature did not converge (error {err:.3g})")
        stack.append((s0, m, left, depth + 1))
        stack.append((m, s1, right, depth + 1))
    return total


def _ratio_terms(roots, a, skip):
    mask = np.ones(roots.size, bool)
    if skip is not None:
        mask[skip] = False
    return roots[mask], mask


def line_integral(g, roots, a, b, wa, *, start_root=None, end_root=None,
                  tol=DEFAULT_TOL, max_depth=DEFAULT_DEPTH):
    """Integrate ``g(x) dx / w`` along the straight segment from ``a`` to ``b``.

    Parameters
    ----------
    g : callable
        Maps a 1-D complex array of points to an array of shape ``(k, n)``
        (or ``(n,)``) of numerator values.
    roots : ndarray, shape (6,)
    a, b : complex
    wa : complex
        ``w(a)``. When ``a`` is the root ``roots[start_root]`` it is instead
        the constant ``c`` in ``w = c*sqrt(x - a)*prod(...)``.
    start_root, end_root : int, optional
        Indices of roots located at ``a`` or ``b``.

    Returns
    -------
    integral : ndarray, shape (k,)
    wb : complex or None
        ``w(b)`` continued along the segment, None when ``b`` is a root.
    """
    a, b = complex(a), complex(b)
    if start_root is not None and end_root is not None:
        m = 0.5 * (a + b)
        i1, wm = line_integral(g, roots, a, m, wa, start_root=start_root, tol=tol, max_depth=max_depth)
        i2, _ = line_integral(g, roots, m, b, wm, end_root=end_root, tol=tol, max_depth=max_depth)
        return i1 + i2, None
    ab = b - a

    def G(x):
        out = np.asarray(g(x), complex)
        return out if out.ndim == 2 else out[None, :]

    if start_root is not None:
        others, _ = _ratio_terms(roots, a, start_root)
        c = (ab / (a - others))
        sq = np.sqrt(ab)

        def f(s):
            t = s * s
            x = a + ab * t
            prod = np.prod(np.sqrt(1.0 + t[:, None] * c), axis=1)
            # dx / w = 2 ab s ds / (wa sqrt(ab) s prod)
            return G(x) * (2.0 * sq / (wa * prod))

        integral = _adaptive(f, tol, max_depth)
        wb = wa * sq * np.prod(np.sqrt(1.0 + c))
        return integral, wb

    if end_root is not None:
        others, _ = _ratio_terms(roots, a, end_root)
        c = (ab / (a - others))
        ba = a - b

        def f(u):
            # x = b + (a - b) u**2, so x - a = ab (1 - u**2)
            t = 1.0 - u * u
            x = b + ba * (u * u)
            prod = np.prod(np.sqrt(1.0 + t[:, None] * c), axis=1)
            # the end-root factor sqrt((x - b)/(a - b)) equals u
            return G(x) * (2.0 * ab / (wa * prod))

        return _adaptive(f, tol, max_depth), None

    c = ab / (a - roots)

    def f(t):
        x = a + ab * t
        prod = np.prod(np.sqrt(1.0 + t[:, None] * c), axis=1)
        return G(x) * (ab / (wa * prod))

    integral = _adaptive(f, tol, max_depth)
    return integral, wa * np.prod(np.sqrt(1.0 + c))


def polyline_integral(g, roots, points, w0, *, start_root=None, end_root=None,
                      tol=DEFAULT_TOL, max_depth=DEFAULT_DEPTH):
    """Integrate ``g dx / w`` along a polyline, continuing ``w`` vertex to vertex.

    ``start_root`` and ``end_root`` flag roots at the first or last vertex.
    Returns ``(integral, w_end)`` with ``w_end`` None if the path ends at a root.
    """
    total = 0.0
    w = w0
    n = len(points)
    for i in range(n - 1):
        sr = start_root if i == 0 else None
        er = end_root if i == n - 2 else None
        val, w = line_integral(g, roots, points[i], points[i + 1], w, start_root=sr,
                               end_root=er, tol=tol, max_depth=max_depth)
        total = total + val
    return total, w


def disk_w(roots, center, w_center, x):
    """Continue ``w`` from ``center`` into a disk that contains no root."""
    x = np.asarray(x, complex)
    return w_center * np.prod(np.sqrt((x[..., None] - roots) / (center - roots)), axis=-1)


def circle_integral(g, roots, center, w_center, radius, *, tol=1e-13, n0=64, n_max=1 << 16):
    """Counterclockwise integral of ``g dx / w`` over a circle without roots inside.

    The periodic trapezoidal rule converges geometrically for analytic
    integrands; the node count doubles until two levels agree.
    """
    if np.min(np.abs(roots - center)) <= radius * (1.0 + 1e-9):
        raise ValueError("circle must not enclose or touch a branch point")

    def tr(n):
        th = 2.0 * np.pi * np.arange(n) / n
        x = center + radius * np.exp(1j * th)
        w = disk_w(roots, center, w_center, x)
        vals = np.asarray(g(x), complex)
        vals = vals if vals.ndim == 2 else vals[None, :]
        dx = 1j * radius * np.exp(1j * th)
        return (vals * dx / w).sum(axis=1) * (2.0 * np.pi / n)

    prev = tr(n0)
    n = 2 * n0
    while n <= n_max:
        cur = tr(n)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur
        prev, n = cur, 2 * n
    raise NoConvergence("trapezoidal rule on circle did not converge")
