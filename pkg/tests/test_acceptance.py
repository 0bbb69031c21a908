"""Acceptance criteria, one test each.

Every test records a PASS or FAIL line with its runtime; the lines are
printed at the end of the pytest run. Run directly with
``python3 tests/test_acceptance.py``.
"""

import contextlib
import sys
import time

import numpy as np
import pytest

from moduli_walls import (BranchDivisor, CellCoordinates, GraphType, build_graph, cusp_exponent,
                          eta, expansion_data, find_wall, forward, inverse, normalize, period)
from moduli_walls.abelian import even_contour, odd_contour
from moduli_walls.cells import FIELDS
from moduli_walls.asymptotics import (DEFAULT_SIGNS, alpha_beta, displacement_solutions,
                                      select_signs, taylor_fit)

from conftest import ACCEPTANCE, WALL_SEEDS, random_divisors

CUSP_GRID = 1e-3 / 2.0 ** np.arange(10)


@contextlib.contextmanager
def criterion(n, title, budget, spent=0.0):
    """Record PASS or FAIL for criterion ``n``; ``spent`` is time already used in fixtures."""
    info = {}
    t0 = time.perf_counter() - spent
    ok = False
    try:
        yield info
        ok = True
    finally:
        dt = time.perf_counter() - t0
        if ok and dt > budget:
            ok = False
            info["time"] = f"over budget {budget:g} s"
        extra = "; ".join(f"{k}={v}" for k, v in info.items())
        ACCEPTANCE[n] = f"[{'PASS' if ok else 'FAIL'}] {n}. {title} ({dt:.1f} s){': ' + extra if extra else ''}"
    if dt > budget:
        pytest.fail(f"criterion {n} took {dt:.1f} s (budget {budget:g} s)")


def _walls():
    return [find_wall(BranchDivisor(*s)) for s in WALL_SEEDS]


def test_1_normalization():
    with criterion(1, "normalization suite", 30.0) as info:
        worst_even = worst_odd = worst_eta = 0.0
        for E in random_divisors(20):
            D = normalize(E)
            for s in (1, 2):
                worst_even = max(worst_even, abs(period(D, even_contour(E, s))))
                worst_odd = max(worst_odd, abs(period(D, odd_contour(E, s)).real))
        for E0 in _walls():
            worst_eta = max(worst_eta, abs(eta(normalize(E0), -1.0) - 1j * np.pi))
        info.update(even=f"{worst_even:.1e}", odd_re=f"{worst_odd:.1e}", eta_m1=f"{worst_eta:.1e}")
        assert worst_even < 1e-9
        assert worst_odd < 1e-8
        assert worst_eta < 1e-7


def test_2_residues():
    with criterion(2, "residue vs quadrature for IC and ICy", 10.0) as info:
        worst = 0.0
        for E0 in _walls():
            X = expansion_data(E0)
            for p in X.points:
                worst = max(worst, abs(p.IC - p.IC_residue) / abs(p.IC_residue),
                            abs(p.ICy - p.ICy_residue) / abs(p.ICy_residue))
        info["max_rel"] = f"{worst:.1e}"
        assert worst < 1e-6


def test_3_taylor(walls):
    with criterion(3, "Taylor coefficients alpha^3 and beta4", 5.0) as info:
        worst = 0.0
        for E0 in walls:
            alpha, beta4, _ = alpha_beta(E0)
            c = taylor_fit(E0)
            worst = max(worst, abs(c[3] - alpha ** 3) / alpha ** 3, abs(c[4] - beta4) / abs(beta4))
        info["max_rel"] = f"{worst:.1e}"
        assert worst < 1e-5


def _inversion_cases(walls):
    cases = []
    for E0, seed in zip(walls, WALL_SEEDS):
        for f in (1.0, 0.97, 1.03):
            cases.append(BranchDivisor(E0.e1, complex(E0.e2.real, E0.e2.imag * f)))
        cases.append(BranchDivisor(*seed))
    return cases


def test_4_inversion(walls):
    with criterion(4, "inversion round trips", 60.0) as info:
        rng = np.random.default_rng(4)
        kinds = {}
        worst_div = worst_w = 0.0
        for E in _inversion_cases(walls):
            kind, A = forward(E)
            kinds[kind.value] = kinds.get(kind.value, 0) + 1
            guess = BranchDivisor.from_vector(E.as_vector() + 1e-3 * rng.standard_normal(4))
            E2 = inverse(A, guess)
            worst_div = max(worst_div, np.max(np.abs(E2.as_vector() - E.as_vector())))
            # forward of the inverse reproduces the target weights
            kind2, A2 = forward(E2)
            assert kind2 is kind
            worst_w = max(worst_w, np.max(np.abs(A2.vector - A.vector)))
        info.update(cases=sum(kinds.values()), cells=kinds, div=f"{worst_div:.1e}",
                    weights=f"{worst_w:.1e}")
        assert sum(kinds.values()) == 20 and len(kinds) == 3
        assert worst_div < 1e-8 and worst_w < 1e-8


def test_5_error_scaling(expansion):
    with criterion(5, "error-term scaling under one orientation assignment", 120.0) as info:
        hv, dA = (0.05, 0.025, 0.0125), (0.02, 0.01, 0.005)
        sols = displacement_solutions(expansion, hv, dA)
        best, table = select_signs(expansion, hv, dA, sols)
        rh, ra = table[best]
        info.update(signs=best, h_ratios=f"{rh.min():.2f}..{rh.max():.2f}",
                    dA_ratios=f"{ra.min():.2f}..{ra.max():.2f}")
        assert best == DEFAULT_SIGNS
        assert np.all((rh >= 8) & (rh <= 32))
        assert np.all((ra >= 2.8) & (ra <= 5.7))


@pytest.fixture(scope="module")
def cusp_fits(expansion):
    t0 = time.perf_counter()
    fits = {s: cusp_exponent(expansion, s, CUSP_GRID) for s in (1, -1)}
    return fits, time.perf_counter() - t0


def test_6_cusp_exponents(cusp_fits):
    fits, elapsed = cusp_fits
    with criterion(6, "cusp exponents 2/3 and derivative exponents -1/3", 120.0, elapsed) as info:
        for s, fit in fits.items():
            tag = "plus" if s > 0 else "minus"
            info[tag] = ("slopes " + ",".join(f"{v:.4f}" for v in fit.slopes)
                         + " deriv " + ",".join(f"{v:.4f}" for v in fit.derivative_slopes))
        for fit in fits.values():
            assert sum(fit.used) >= 6
            for v in fit.slopes:
                assert abs(v - 2 / 3) <= 0.02
            for v in fit.derivative_slopes:
                assert abs(v + 1 / 3) <= 0.02


def test_7_continuity(cusp_fits, expansion):
    fits, _ = cusp_fits
    with criterion(7, "continuity across the wall on matched sweeps", 120.0) as info:
        plus = fits[1]
        # same h on both sides: W2 - W1 = 4 h**3 = 2 H0
        minus = cusp_exponent(expansion, -1, 2.0 * CUSP_GRID)
        gap = np.array([max(abs(a.e1 - b.e1), abs(a.e2 - b.e2))
                        for a, b in zip(plus.divisors, minus.divisors)])
        info["gaps"] = ",".join(f"{g:.2e}" for g in gap[-4:])
        assert np.all(np.diff(gap[-4:]) < 0)
        assert gap[-1] < gap[0]


def test_8_graph_structure(wall):
    with criterion(8, "graph ord values and polyhedron inequalities", 60.0) as info:
        cells = {GraphType.GammaZero: wall,
                 GraphType.GammaPlus: BranchDivisor(wall.e1, complex(wall.e2.real, 1.03 * wall.e2.imag)),
                 GraphType.GammaMinus: BranchDivisor(wall.e1, complex(wall.e2.real, 0.97 * wall.e2.imag))}
        for kind, E in cells.items():
            G = build_graph(E)
            assert G.kind is kind
            assert G.ord_mismatches() == []
            CellCoordinates(kind, tuple(G.weights[f] for f in FIELDS[kind])).validate()
            info[kind.value] = f"{len(G.vertices)} vertices"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
