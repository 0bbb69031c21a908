import mpmath
import numpy as np
import pytest

from moduli_walls import BranchDivisor
from moduli_walls.errors import NoConvergence
from moduli_walls.quadrature import circle_integral, disk_w, line_integral, polyline_integral

E = BranchDivisor(0.5 + 1j, -0.5 + 0.8j)
R = E.roots


def one(x):
    return np.ones_like(x)


@pytest.fixture(autouse=True)
def _precision():
    # the oracle loses digits to cancellation next to a root at 15 digits
    with mpmath.workdps(30):
        yield


def mp_P(x):
    return mpmath.fprod([x - mpmath.mpc(r.real, r.imag) for r in R])


def test_real_segment_matches_mpmath():
    val, _ = line_integral(one, R, 1.5, 4.0, np.sqrt(np.prod(1.5 - R).real))
    ref = mpmath.quad(lambda t: 1 / mpmath.sqrt(mpmath.re(mp_P(t))), [1.5, 4.0])
    assert abs(val[0] - complex(ref)) < 1e-13 * abs(complex(ref))


def test_root_endpoint_matches_mpmath():
    # w = c sqrt(x - 1) prod(...), with c chosen so that w > 0 on (1, inf)
    c = np.sqrt(np.prod(1.0 - R[1:]).real)
    val, w_end = line_integral(lambda x: x * x, R, 1.0, 2.0, c, start_root=0)
    ref = mpmath.quad(lambda t: t * t / mpmath.sqrt(mpmath.re(mp_P(t))), [1.0, 2.0])
    assert abs(val[0] - complex(ref)) < 1e-12 * abs(complex(ref))
    assert abs(w_end - np.sqrt(np.prod(2.0 - R).real)) < 1e-13


def test_both_endpoints_roots_matches_mpmath():
    # from 1 to -1 through the upper half plane is not straight; use the real chord
    # where w is purely imaginary: w = i sqrt(-P) on (-1, 1) from the base sheet.
    c = np.sqrt(np.prod(1.0 - R[1:]).real)
    val, w_end = line_integral(one, R, 1.0, -1.0, c, start_root=0, end_root=1)
    assert w_end is None
    ref = mpmath.quad(lambda t: 1 / mpmath.sqrt(-mpmath.re(mp_P(t))), [-1.0, 1.0])
    assert abs(abs(val[0]) - float(ref)) < 1e-11 * float(ref)
    assert abs(val[0].real) < 1e-12 * abs(val[0])


def test_complex_segment_matches_mpmath():
    a, b = 3.0 + 3.0j, -2.0 + 2.5j
    wa = complex(np.sqrt(np.prod(a - R)))

    def w(t):
        x = a + (b - a) * t
        return wa * mpmath.fprod([mpmath.sqrt((x - r) / (a - r)) for r in R])

    ref = complex(mpmath.quad(lambda t: (b - a) / w(t), [0, 1]))
    val, _ = line_integral(one, R, a, b, wa)
    assert abs(val[0] - ref) < 1e-13 * abs(ref)


def test_polyline_additivity():
    pts = [3.0 + 3.0j, 0.0 + 3.5j, -2.0 + 2.5j]
    wa = complex(np.sqrt(np.prod(pts[0] - R)))
    whole, w_end = polyline_integral(one, R, pts, wa)
    i1, wm = line_integral(one, R, pts[0], pts[1], wa)
    i2, w2 = line_integral(one, R, pts[1], pts[2], wm)
    assert abs(whole[0] - (i1 + i2)[0]) < 1e-15 * abs(whole[0]) + 1e-16
    assert w_end == w2


def test_circle_cauchy():
    z, center, radius = 4.0 + 4.1j, 4.0 + 4.0j, 0.5
    wc = complex(np.sqrt(np.prod(center - R)))
    # g = w / (x - z) makes g dx / w = dx / (x - z)
    val = circle_integral(lambda x: disk_w(R, center, wc, x) / (x - z), R, center, wc, radius)
    assert abs(val[0] - 2j * np.pi) < 1e-13


def test_circle_must_avoid_roots():
    with pytest.raises(ValueError):
        circle_integral(one, R, 0.5 + 1j, 1.0, 0.1)


def test_nonconvergence_is_reported():
    with pytest.raises(NoConvergence):
        line_integral(lambda x: 1 / (x - 0.3), R, 0.0 + 2j, 0.3 + 1e-9j, 1.0, max_depth=2)
