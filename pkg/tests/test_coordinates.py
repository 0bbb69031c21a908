import numpy as np
import pytest

from moduli_walls import (BranchDivisor, CellCoordinates, GraphType, classify, continue_path,
                          find_wall, forward, inverse, normalize)
from moduli_walls.asymptotics import Displacement, displaced_target
from moduli_walls.coordinates import cell_values, discriminant, label_divisor
from moduli_walls.errors import NoBracket, NoConvergence, ValidationError, WeightOutOfRange

from conftest import WALL_SEEDS


def shifted(E, factor):
    return BranchDivisor(E.e1, complex(E.e2.real, E.e2.imag * factor))


def test_find_wall_converges(walls):
    for E0 in walls:
        assert abs(discriminant(E0)) < 1e-12


def test_find_wall_keeps_wall_points(wall):
    assert find_wall(wall) == wall


def test_find_wall_without_sign_change():
    with pytest.raises(NoBracket):
        find_wall(BranchDivisor(0.2 + 3.0j, -0.2 + 2.9j), max_expand=1)


def test_wall_is_gamma_zero(walls):
    for E0 in walls:
        kind, coords = forward(E0)
        assert kind is GraphType.GammaZero
        coords.validate()
        _, ex = cell_values(E0, kind)
        assert abs(ex["eta_z"].imag) < 1e-8
        assert ex["eta_e1"].imag > 0 > ex["eta_e2"].imag


def test_wall_separates_the_two_cells(wall):
    assert forward(shifted(wall, 0.97))[0] is GraphType.GammaMinus
    assert forward(shifted(wall, 1.03))[0] is GraphType.GammaPlus


def test_eta_minus_one_at_walls(walls):
    from moduli_walls import eta
    for E0 in walls:
        assert abs(eta(normalize(E0), -1.0) - 1j * np.pi) < 1e-7


def test_classification_locally_constant(wall):
    for E in (shifted(wall, 0.97), shifted(wall, 1.03)):
        D = normalize(E)
        kind = classify(D)
        assert abs(discriminant(E)) > 1e-9
        for k in range(4):
            v = E.as_vector()
            v[k] += 1e-9
            assert classify(normalize(BranchDivisor.from_vector(v))) is kind


def test_labeling_rule(wall):
    assert label_divisor(wall) == wall
    assert label_divisor(wall.swapped()) == wall


def test_wall_limit_of_plus_side(wall):
    # H0 -> 0 and the remaining weights approach the wall values
    _, A0 = forward(wall)
    prev = None
    for f in (1.04, 1.02, 1.01, 1.005):
        _, c = forward(shifted(wall, f))
        gap = max(c["H0"], abs(c["H1"] + c["H0"] - A0["H1"]), abs(c["W"] - A0["W"]))
        if prev is not None:
            assert gap < prev
        prev = gap
    assert prev < 0.05


@pytest.mark.parametrize("factor", [0.97, 1.03])
def test_round_trips(wall, factor):
    E = shifted(wall, factor)
    kind, A = forward(E)
    assert np.max(np.abs(inverse(A, E).as_vector() - E.as_vector())) < 1e-9
    rng = np.random.default_rng(1)
    guess = BranchDivisor.from_vector(E.as_vector() + 1e-3 * rng.standard_normal(4))
    E2 = inverse(A, guess)
    assert np.max(np.abs(E2.as_vector() - E.as_vector())) < 1e-8
    _, A2 = forward(E2)
    assert np.max(np.abs(A2.vector - A.vector)) < 1e-8


def test_infeasible_target_rejected_before_iterating(wall):
    bad = CellCoordinates.make("GammaZero", H1=1.0, H2=0.6, W=1.0)
    with pytest.raises(WeightOutOfRange):
        inverse(bad, wall, max_iter=0)


def test_iteration_cap(wall):
    _, A = forward(shifted(wall, 1.03))
    with pytest.raises(NoConvergence):
        inverse(A, shifted(wall, 1.06), max_iter=1)


def test_jacobian_well_conditioned(wall):
    for E in (shifted(wall, 0.97), shifted(wall, 1.03)):
        x = E.as_vector()
        kind, A = forward(E)
        J = np.empty((4, 4))
        for k in range(4):
            step = 1e-6 * (1 + abs(x[k]))
            xp, xm = x.copy(), x.copy()
            xp[k] += step
            xm[k] -= step
            J[:, k] = (cell_values(BranchDivisor.from_vector(xp), kind)[0].vector
                       - cell_values(BranchDivisor.from_vector(xm), kind)[0].vector) / (2 * step)
        assert np.linalg.cond(J) < 1e8


class TestContinuePath:
    def test_single_element(self, wall):
        E = shifted(wall, 1.03)
        _, A = forward(E)
        assert continue_path(E, [A]) == [inverse(A, E)]

    def test_constant_path(self, wall):
        E = shifted(wall, 0.97)
        _, A = forward(E)
        out = continue_path(E, [A, A, A])
        for F in out:
            assert np.max(np.abs(F.as_vector() - out[0].as_vector())) < 1e-9

    def test_sweep_approaches_wall(self, expansion):
        X = expansion
        h = (np.array([1e-3, 2.5e-4, 6.25e-5, 1.5625e-5]) / 2.0) ** (1 / 3)
        targets = [displaced_target(X.A0, Displacement(h=t, sign=1)) for t in h]
        from moduli_walls.asymptotics import transversal_guess
        out = continue_path(transversal_guess(X, Displacement(h=h[0], sign=1)), targets)
        dist = [np.linalg.norm(E.as_vector() - X.E0.as_vector()) for E in out]
        assert all(b < a for a, b in zip(dist, dist[1:]))

    def test_step_limit(self, wall):
        a = CellCoordinates.make("GammaZero", H1=0.3, H2=0.3, W=1.0)
        b = CellCoordinates.make("GammaZero", H1=0.5, H2=0.3, W=1.0)
        with pytest.raises(ValidationError):
            continue_path(wall, [a, b], max_step=0.01)

    def test_failure_reports_index(self, wall, monkeypatch):
        from moduli_walls import coordinates
        E = shifted(wall, 1.03)
        _, A = forward(E)
        calls = []
        orig = coordinates.inverse

        def flaky(target, guess, tol=1e-10):
            calls.append(target)
            if len(calls) == 2:
                raise NoConvergence("forced")
            return orig(target, guess, tol=tol)

        monkeypatch.setattr(coordinates, "inverse", flaky)
        with pytest.raises(NoConvergence) as info:
            continue_path(E, [A, A])
        assert info.value.index == 1
