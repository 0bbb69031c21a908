import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moduli_walls import BranchDivisor, PlanePath, continue_w, sextic
from moduli_walls.curve import sextic_coefficients, w_base_real, w_on_line
from moduli_walls.errors import InconsistentStart, PathTooCloseToBranchPoint, ValidationError

E_REF = BranchDivisor(0.5 + 1j, -0.5 + 0.8j)


def circle(center, radius, n=64):
    th = 2 * np.pi * np.arange(n + 1) / n
    v = center + radius * np.exp(1j * th)
    v[-1] = v[0]
    return PlanePath(tuple(v))


def w_from(E, x):
    return complex(np.sqrt(complex(sextic(E, x))))


class TestBranchDivisor:
    def test_rejects_lower_half_plane(self):
        with pytest.raises(ValidationError):
            BranchDivisor(0.5 - 1j, 0.2 + 1j)

    def test_rejects_coincident_points(self):
        with pytest.raises(ValidationError):
            BranchDivisor(0.5 + 1j, 0.5 + 1j)

    def test_json_round_trip(self):
        assert BranchDivisor.from_json(E_REF.to_json()) == E_REF

    def test_root_order(self):
        r = E_REF.roots
        assert r[0] == 1 and r[1] == -1 and r[2] == E_REF.e1 and r[3] == np.conj(E_REF.e1)


class TestSextic:
    @pytest.mark.parametrize("x", [1.0, -1.0])
    def test_vanishes_at_fixed_branch_points(self, x):
        assert sextic(E_REF, x) == 0

    def test_vanishes_at_e1(self):
        assert abs(sextic(E_REF, E_REF.e1)) < 1e-15

    def test_matches_horner(self):
        c = sextic_coefficients(E_REF)
        horner = 0j
        for a in c:
            horner = horner * 2.0 + a
        assert abs(sextic(E_REF, 2.0) - horner) < 1e-14 * abs(horner)

    def test_sign_on_real_axis(self):
        for x in (1.5, 3.0, 10.0, -1.5, -4.0):
            v = sextic(E_REF, x)
            assert abs(v.imag) < 1e-12 * abs(v) and v.real > 0
        for x in (-0.9, 0.0, 0.3, 0.99):
            v = sextic(E_REF, x)
            assert abs(v.imag) < 1e-12 * abs(v) and v.real < 0


class TestContinueW:
    def test_constant_path(self):
        x = 0.3 + 0.2j
        w0 = w_from(E_REF, x)
        assert continue_w(E_REF, PlanePath((x, x)), w0) == w0

    def test_loop_around_conjugate_pair_returns_start(self):
        # a loop around e1 and conj(e1) encloses two branch points
        E = BranchDivisor(2.0 + 0.5j, -2.0 + 1.5j)
        path = circle(2.0, 0.9)
        w0 = w_from(E, path.start)
        assert abs(continue_w(E, path, w0) - w0) < 1e-12 * abs(w0)

    def test_small_loop_around_e1_flips_sign(self):
        path = circle(E_REF.e1, 0.05)
        w0 = w_from(E_REF, path.start)
        w1 = continue_w(E_REF, path, w0)
        dense = continue_w(E_REF, path, w0, nodes_per_segment=320)
        assert abs(w1 - dense) < 1e-12 * abs(w0)
        assert abs(w1 + w0) < 1e-12 * abs(w0)

    def test_monodromy_parity(self):
        E = E_REF
        for center, radius, enclosed in ((0.0, 3.0, 6), (1.0, 0.2, 1), (0.5 + 1j, 0.1, 1),
                                         (0.0 + 0.9j, 0.7, 2)):
            path = circle(center, radius, 128)
            n = sum(abs(r - center) < radius for r in E.roots)
            assert n == enclosed
            w0 = w_from(E, path.start)
            assert abs(continue_w(E, path, w0) - (-1) ** n * w0) < 1e-10 * abs(w0)

    def test_mirror_symmetry(self):
        path = PlanePath((2.0 + 0.1j, 1.0 + 2.0j, -1.5 + 0.5j, -0.2 + 0.3j))
        w0 = w_from(E_REF, path.start)
        w1 = continue_w(E_REF, path, w0)
        w1c = continue_w(E_REF, path.conjugate(), np.conj(w0))
        assert abs(w1c - np.conj(w1)) < 1e-10 * abs(w1)

    def test_inconsistent_start(self):
        with pytest.raises(InconsistentStart):
            continue_w(E_REF, PlanePath((2.0, 3.0)), 1.0)

    def test_too_close_to_branch_point(self):
        x0 = 0.5 + 0.5j
        with pytest.raises(PathTooCloseToBranchPoint):
            continue_w(E_REF, PlanePath((x0, E_REF.e1)), w_from(E_REF, x0))


def test_w_base_real_squares_to_sextic():
    x = np.linspace(-0.95, 0.95, 9)
    w = w_base_real(E_REF.roots, x)
    assert np.allclose(w ** 2, sextic(E_REF, x), rtol=1e-12)
    assert np.all(w.imag > 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(0.05, 2), st.floats(-2, 2), st.floats(0.05, 2))
def test_closed_form_matches_tracking(ax, ay, bx, by):
    """Exact ray continuation agrees with nearest-sign tracking."""
    a, b = complex(ax, ay) + 2.5j, complex(bx, by) + 2.5j
    E = E_REF
    w0 = w_from(E, a)
    exact = complex(w_on_line(E.roots, a, w0, b))
    tracked = continue_w(E, PlanePath((a, b)), w0)
    assert abs(exact - tracked) < 1e-10 * abs(exact)
