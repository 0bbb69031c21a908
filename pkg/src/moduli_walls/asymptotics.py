"""Expansion of the branch points at a wall point and its verification.

At a wall divisor E0 the differential has a double zero z on (1, inf) and

    eta(x) = W + alpha**3 (x - z)**3 + beta4 (x - z)**4 + ...

with alpha**3 = 1/(3 w(z)) and beta4 = -w'(z) / (4 w(z)**2). For a branch
point e the differential d eta^e = Omega(x) w(x) dx / (x - z)**2,
Omega(x) = (e**2 - 1)/((x**2 - 1)(x - e)), drives the first-order motion of
e under a tangential shift dA = (dH1, dH2, dW) and a transversal shift h:

    2 pi i (e(A+-) - e(A0)) = i dH1 I1 - i dH2 I2 + dW IC +- 3 h**2 ICy + O((|dA| + h**2)**2).
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .abelian import even_contour, normalize, period, w_at
from .cells import CellCoordinates, GraphType, critical_points
from .coordinates import _eta_real, forward, inverse
from .curve import BranchDivisor
from .errors import BranchInconsistency, PoleEvaluation, ResidueMismatch, ValidationError
from .quadrature import circle_integral, disk_w, line_integral
from .slits import point_segment_distance

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class Displacement:
    """Tangential shift (dH1, dH2, dW), transversal size ``h`` and side ``sign``."""

    dH1: float = 0.0
    dH2: float = 0.0
    dW: float = 0.0
    h: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValidationError("sign must be +1 or -1")
        if self.h < 0:
            raise ValidationError("h must be non-negative")

    @property
    def tangential_norm(self):
        return float(np.sqrt(self.dH1 ** 2 + self.dH2 ** 2 + self.dW ** 2))


@dataclass(frozen=True)
class BranchPointData:
    e: complex
    Omega_z: complex
    dOmega_z: complex
    I1: complex
    I2: complex
    IC: complex
    ICy: complex
    IC_residue: complex
    ICy_residue: complex


@dataclass(frozen=True)
class WallExpansion:
    """All ingredients of the expansion at a wall divisor."""

    E0: BranchDivisor
    z: float
    alpha: float
    beta4: float
    w_z: float
    dsc: float
    A0: CellCoordinates
    radius_C: float
    points: tuple = field(default=())

    def for_point(self, s):
        return self.points[s - 1]

    def to_json(self):
        def c(v):
            return [float(np.real(v)), float(np.imag(v))]

        return {
            "divisor": self.E0.to_json(),
            "z": self.z, "alpha": self.alpha, "beta4": self.beta4, "w_z": self.w_z,
            "dsc": self.dsc, "weights": self.A0.to_json(), "radius_C": self.radius_C,
            "branch_points": [
                {"e": c(p.e), "Omega_z": c(p.Omega_z), "dOmega_z": c(p.dOmega_z),
                 "I1": c(p.I1), "I2": c(p.I2), "IC": c(p.IC), "ICy": c(p.ICy),
                 "IC_residue": c(p.IC_residue), "ICy_residue": c(p.ICy_residue)}
                for p in self.points
            ],
        }


def _wall_data(E0, wall_tol):
    D = normalize(E0, check=False)
    dsc = critical_points(D).dsc
    if abs(dsc) > wall_tol:
        raise ValidationError(f"divisor is not on the wall (Dsc = {dsc:.3g})")
    z = -0.5 * D.a
    if not z > 1:
        raise BranchInconsistency(
            f"double zero z = {z:.6g} is not on (1, inf); w(z)**2 = {np.prod(z - E0.roots).real:.6g}")
    _, wz = _eta_real(D, z)
    if not (abs(wz.imag) < 1e-12 * abs(wz) and wz.real > 0):
        raise BranchInconsistency(f"w(z) = {wz} is not positive on the base sheet")
    return D, float(z), float(wz.real), dsc


def alpha_beta(E0, wall_tol=1e-9):
    """Coefficients of eta(x) = W + alpha**3 (x-z)**3 + beta4 (x-z)**4 + ...

    Returns
    -------
    alpha, beta4, z : float

    Raises
    ------
    BranchInconsistency
        If the double zero is not on (1, inf), where w(z) > 0 on the base sheet.
    """
    _, z, wz, _ = _wall_data(E0, wall_tol)
    dlog = 0.5 * np.sum(1.0 / (z - E0.roots)).real
    alpha = (1.0 / (3.0 * wz)) ** (1.0 / 3.0)
    beta4 = -wz * dlog / (4.0 * wz * wz)
    return float(alpha), float(beta4), z


def _radius_C(E0, z):
    from .abelian import _slits
    S = _slits(E0)
    dist = [abs(z - r) for r in E0.roots]
    for s in (1, 2):
        pts = S.closed(s)
        dist += [point_segment_distance(z, p, q) for p, q in zip(pts[:-1], pts[1:])]
    return 0.5 * min(dist)


def eta_near(E0, D, z, wz, W, x):
    """eta at points ``x`` of the disk around z, by radial integration from z."""
    out = np.empty(np.size(x), complex)
    for k, xk in enumerate(np.atleast_1d(x)):
        val, _ = line_integral(lambda t: ((t - z) ** 2)[None, :], E0.roots, complex(z), complex(xk), wz)
        out[k] = W + val[0]
    return out


def taylor_fit(E0, radius=None, n=64, degree=12, wall_tol=1e-9):
    """Least-squares fit of eta - W by powers of (x - z) on a circle around z.

    Returns the complex coefficients ``c[0..degree]``; c[3] estimates
    alpha**3 and c[4] estimates beta4.
    """
    D, z, wz, _ = _wall_data(E0, wall_tol)
    if radius is None:
        radius = 0.25 * min(abs(z - r) for r in E0.roots)
    W = _eta_real(D, z)[0].real
    th = 2 * np.pi * np.arange(n) / n
    x = z + radius * np.exp(1j * th)
    f = eta_near(E0, D, z, wz, W, x) - W
    V = (radius * np.exp(1j * th))[:, None] ** np.arange(degree + 1)[None, :]
    coef, *_ = np.linalg.lstsq(V, f, rcond=None)
    return coef


def omega(e, x):
    """Omega(x) = (e**2 - 1) / ((x**2 - 1)(x - e))."""
    x = np.asarray(x, complex)
    return (e * e - 1.0) / ((x * x - 1.0) * (x - e))


def domega(e, x):
    x = np.asarray(x, complex)
    return -omega(e, x) * (2 * x / (x * x - 1.0) + 1.0 / (x - e))


def _numerator_e(E0, e, z):
    """g with d eta^e = g(x) dx / w (no poles at the branch points)."""
    others = [r for r in E0.roots if abs(r - e) > 1e-14 and not (r.imag == 0 and abs(abs(r.real) - 1) < 1e-14)]
    assert len(others) == 3

    def g(x):
        x = np.asarray(x, complex)
        return (e * e - 1.0) * (x - others[0]) * (x - others[1]) * (x - others[2]) / (x - z) ** 2

    return g


def d_eta_e(E0, e, x, w=None, z=None):
    """Coefficient of d eta^e at ``x`` in both algebraic forms.

    Parameters
    ----------
    E0 : BranchDivisor
    e : complex
        One of the branch points e1, e2 (or their conjugates).
    x : complex
    w : complex, optional
        Value of w at x; the cut-plane branch is used when omitted.
    z : float, optional
        Double zero; computed from E0 when omitted.

    Returns
    -------
    complex
        Omega(x) w(x) / (x - z)**2, after checking it against
        (e**2-1)(x-conj e)(x-e')(x-conj e') / ((x-z)**2 w) to 1e-10 relative.

    Raises
    ------
    PoleEvaluation
        At x = z, x = +-1 or x = e.
    """
    if z is None:
        z = -0.5 * normalize(E0, check=False).a
    x = complex(x)
    for p in (z, 1.0, -1.0, e):
        if abs(x - p) < 1e-12:
            raise PoleEvaluation(f"d eta^e is not evaluated at {p}")
    if w is None:
        w = w_at(E0, x)
    f1 = complex(omega(e, x)) * w / (x - z) ** 2
    f2 = complex(_numerator_e(E0, e, z)(np.array([x]))[0]) / w
    if abs(f1 - f2) > 1e-10 * max(abs(f1), abs(f2)):
        raise PoleEvaluation(f"the two forms of d eta^e disagree at {x}: {f1} vs {f2}")
    return f1


def expansion_data(E0, *, wall_tol=1e-9, check_tol=1e-5, n_circle=128):
    """Compute the wall expansion with residues and contour quadrature.

    Raises
    ------
    ResidueMismatch
        If residue and quadrature values of IC or ICy differ by more than
        ``check_tol`` relative.
    """
    D, z, wz, dsc = _wall_data(E0, wall_tol)
    alpha, beta4, _ = alpha_beta(E0, wall_tol)
    _, A0 = forward(E0, wall_tol=wall_tol)
    W = A0["W"]
    rC = _radius_C(E0, z)
    # y = alpha (x - z) (1 + u)**(1/3) needs |u| < 1 on the circle
    roots = E0.roots
    pts = []
    th = 2 * np.pi * np.arange(n_circle) / n_circle
    xs = z + rC * np.exp(1j * th)
    eta_c = eta_near(E0, D, z, wz, W, xs)
    u = (eta_c - W) / (alpha ** 3 * (xs - z) ** 3) - 1.0
    while np.max(np.abs(u)) > 0.5:
        rC *= 0.5
        xs = z + rC * np.exp(1j * th)
        eta_c = eta_near(E0, D, z, wz, W, xs)
        u = (eta_c - W) / (alpha ** 3 * (xs - z) ** 3) - 1.0
    y = alpha * (xs - z) * (1.0 + u) ** (1.0 / 3.0)
    wc = disk_w(roots, complex(z), wz, xs)
    dx = 1j * (xs - z) * (2 * np.pi / n_circle)
    for s in (1, 2):
        e = E0.e1 if s == 1 else E0.e2
        g = _numerator_e(E0, e, z)
        Om, dOm = complex(omega(e, z)), complex(domega(e, z))
        IC_res = TWO_PI_I * (dOm / (3 * alpha ** 3) - 4 * beta4 * Om / (9 * alpha ** 6))
        ICy_res = TWO_PI_I * Om / (3 * alpha ** 2)
        IC = complex(circle_integral(g, roots, complex(z), wz, rC)[0])
        ICy = complex(np.sum(y * g(xs) / wc * dx))
        for name, q, r in (("IC", IC, IC_res), ("ICy", ICy, ICy_res)):
            if abs(q - r) > check_tol * abs(r):
                raise ResidueMismatch(f"{name} for e{s}: quadrature {q} vs residues {r}")
        I1 = period(D, even_contour(E0, 1), g)
        I2 = period(D, even_contour(E0, 2), g)
        pts.append(BranchPointData(e, Om, dOm, I1, I2, IC, ICy, IC_res, ICy_res))
    return WallExpansion(E0, z, alpha, beta4, wz, dsc, A0, rC, tuple(pts))


# ---------------------------------------------------------------- prediction

DEFAULT_SIGNS = (1, 1, 1)


def predict_displacement(X, s, d, signs=DEFAULT_SIGNS):
    """Predicted first-order displacement of branch point e_s.

    ``signs`` = (sC, s1, s2) multiplies the integrals over C, C1 and C2; the
    default is the counterclockwise orientation on the cut-plane sheet.
    """
    p = X.for_point(s)
    sC, s1, s2 = signs
    val = (1j * d.dH1 * s1 * p.I1 - 1j * d.dH2 * s2 * p.I2 + d.dW * sC * p.IC
           + d.sign * 3.0 * d.h ** 2 * sC * p.ICy)
    return val / TWO_PI_I


def displaced_target(A0, d):
    """Coordinates A+ or A- built from the wall weights A0 (or A0 + dA if h = 0)."""
    H1, H2, W = A0["H1"] + d.dH1, A0["H2"] + d.dH2, A0["W"] + d.dW
    t = 2.0 * d.h ** 3
    if d.h == 0:
        return CellCoordinates.make(GraphType.GammaZero, H1=H1, H2=H2, W=W)
    if d.sign > 0:
        return CellCoordinates.make(GraphType.GammaPlus, H0=t, H1=H1 - t, H2=H2 + t, W=W)
    return CellCoordinates.make(GraphType.GammaMinus, H1=H1, H2=H2, W1=W - t, W2=W + t)


def transversal_guess(X, d):
    """Starting divisor for the inverse off the wall.

    The zeroth-order guess uses the tangential prediction; the transversal
    part moves E0 along the gradient of the discriminant until Dsc equals
    -+4 h**2 / alpha**2, the value predicted by y = alpha (x - z).
    """
    from .coordinates import discriminant
    E0 = X.E0
    x0 = E0.as_vector()
    tang = Displacement(d.dH1, d.dH2, d.dW, 0.0, d.sign)
    shift = np.zeros(4)
    for s in (1, 2):
        de = predict_displacement(X, s, tang)
        shift[2 * s - 2: 2 * s] = [de.real, de.imag]
    x = x0 + shift
    if d.h == 0:
        return BranchDivisor.from_vector(x)
    goal = -d.sign * 4.0 * d.h ** 2 / X.alpha ** 2
    step = 1e-6
    g = np.array([(discriminant(BranchDivisor.from_vector(x + step * np.eye(4)[k]))
                   - discriminant(BranchDivisor.from_vector(x - step * np.eye(4)[k]))) / (2 * step)
                  for k in range(4)])
    d0 = discriminant(BranchDivisor.from_vector(x))
    x = x + (goal - d0) * g / (g @ g)
    # one secant correction along the same direction
    d1 = discriminant(BranchDivisor.from_vector(x))
    if abs(d1 - goal) > 0.05 * abs(goal):
        x = x + (goal - d1) * g / (g @ g)
    return BranchDivisor.from_vector(x)


def solve_displaced(X, d, guess=None, tol=1e-12):
    """Divisor e(A) for the displaced target; warm start from ``guess`` if given."""
    target = displaced_target(X.A0, d)
    if guess is None:
        guess = transversal_guess(X, d)
    return inverse(target, guess, tol=tol)


@dataclass(frozen=True)
class VerificationReport:
    displacement: Displacement
    target: CellCoordinates
    divisor: BranchDivisor
    actual: tuple
    predicted: tuple
    residuals: tuple

    def to_json(self):
        d = self.displacement
        return {
            "displacement": {"dH1": d.dH1, "dH2": d.dH2, "dW": d.dW, "h": d.h, "sign": d.sign},
            "target": self.target.to_json(),
            "divisor": self.divisor.to_json(),
            "actual": [[v.real, v.imag] for v in self.actual],
            "predicted": [[v.real, v.imag] for v in self.predicted],
            "residuals": list(self.residuals),
        }


def verify_theorem(X, d, signs=DEFAULT_SIGNS, guess=None, tol=1e-12):
    """Compare the actual displacement of e1, e2 with the first-order prediction.

    ``X`` is the :class:`WallExpansion` of the wall point (or a wall divisor,
    from which it is computed).
    """
    if isinstance(X, BranchDivisor):
        X = expansion_data(X)
    if d.h == 0 and d.tangential_norm == 0:
        E = X.E0
    else:
        E = solve_displaced(X, d, guess, tol=tol)
    act = (E.e1 - X.E0.e1, E.e2 - X.E0.e2)
    pred = tuple(predict_displacement(X, s, d, signs) for s in (1, 2))
    res = tuple(float(abs(a - p)) for a, p in zip(act, pred))
    return VerificationReport(d, displaced_target(X.A0, d), E, act, pred, res)


def sign_patterns():
    return list(itertools.product((1, -1), repeat=3))


def select_signs(X, h_values=(0.05, 0.025, 0.0125), dA=(0.02, 0.01), solutions=None):
    """Find orientation signs (sC, s1, s2) for which both scalings hold.

    The actual displacements are computed once; each of the eight sign
    patterns is then scored by the worst deviation of the residual ratios
    from the theoretical factors (16 for halving h, 4 for halving dA).

    Returns
    -------
    best : tuple
    table : dict
        Pattern -> (ratios over h for each sign and branch point, ratios over dA).
    """
    if solutions is None:
        solutions = displacement_solutions(X, h_values, dA)
    table = {}
    for sg in sign_patterns():
        ratios_h, ratios_a = [], []
        for sign in (1, -1):
            r = [[abs(a - predict_displacement(X, s, d, sg)) for s, a in zip((1, 2), act)]
                 for d, act in solutions[("h", sign)]]
            r = np.array(r)
            ratios_h.append(r[:-1] / r[1:])
        r = np.array([[abs(a - predict_displacement(X, s, d, sg)) for s, a in zip((1, 2), act)]
                      for d, act in solutions[("dA", 0)]])
        ratios_a.append(r[:-1] / r[1:])
        table[sg] = (np.array(ratios_h), np.array(ratios_a))

    def score(v):
        rh, ra = v
        return max(np.max(np.abs(np.log2(rh) - 4)), np.max(np.abs(np.log2(ra) - 2)))

    best = min(table, key=lambda k: score(table[k]))
    return best, table


def displacement_solutions(X, h_values, dA, direction=(1.0, 0.5, 0.3)):
    """Actual displacements for an h sweep (both signs) and a dA sweep."""
    out = {}
    for sign in (1, -1):
        rows = []
        guess = None
        for h in h_values:
            d = Displacement(h=h, sign=sign)
            E = solve_displaced(X, d, guess)
            rows.append((d, (E.e1 - X.E0.e1, E.e2 - X.E0.e2)))
            guess = E
        out[("h", sign)] = rows
    rows = []
    u = np.asarray(direction, float)
    u = u / np.linalg.norm(u)
    for t in dA:
        d = Displacement(*(t * u), h=0.0)
        E = solve_displaced(X, d)
        rows.append((d, (E.e1 - X.E0.e1, E.e2 - X.E0.e2)))
    out[("dA", 0)] = rows
    return out


@dataclass(frozen=True)
class CuspFit:
    """Log-log fits of |e(A) - e(A0)| against the transversal weight.

    All sweep points are kept; ``used`` flags those entering the fits.
    """

    sign: int
    values: tuple
    distances: tuple
    slopes: tuple
    derivative_slopes: tuple
    divisors: tuple = ()
    residuals: tuple = ()
    used: tuple = ()

    def to_json(self):
        return {"sign": self.sign, "values": list(self.values),
                "distances": [list(d) for d in self.distances],
                "slopes": list(self.slopes), "derivative_slopes": list(self.derivative_slopes),
                "residuals": list(self.residuals), "used": list(self.used)}


def h_from_value(sign, value):
    """Transversal parameter h from H0 = 2 h**3 (sign +) or W2 - W1 = 4 h**3 (sign -)."""
    return (value / 2.0) ** (1.0 / 3.0) if sign > 0 else (value / 4.0) ** (1.0 / 3.0)


def _loglog_slope(x, y):
    A = np.vstack([np.log(x), np.ones(len(x))]).T
    return float(np.linalg.lstsq(A, np.log(y), rcond=None)[0][0])


def cusp_exponent(X, sign, values, max_residual=1e-9, min_points=6):
    """Fit the exponent of |e(A) - e(A0)| in H0 (sign +) or W2 - W1 (sign -).

    The values are solved from the largest down, each warm-started from the
    previous solution. Points whose weight residual exceeds ``max_residual``
    are left out of the fits.

    Returns
    -------
    CuspFit
        ``slopes`` per branch point, and ``derivative_slopes`` of the finite
        difference quotient of e along the sweep (expected -1/3).

    Raises
    ------
    ValidationError
        If fewer than ``min_points`` values are usable.
    """
    if isinstance(X, BranchDivisor):
        X = expansion_data(X)
    vals = np.sort(np.asarray(values, float))[::-1]
    if vals.size < 2 or np.any(np.diff(vals) >= 0) or np.any(vals <= 0):
        raise ValidationError("sweep values must be positive and distinct")
    from .coordinates import cell_values
    guess = None
    dist, es, divs, res = [], [], [], []
    for v in vals:
        d = Displacement(h=h_from_value(sign, v), sign=sign)
        E = solve_displaced(X, d, guess)
        guess = E
        target = displaced_target(X.A0, d)
        coords, _ = cell_values(E, target.kind)
        res.append(float(np.max(np.abs(coords.vector - target.vector))))
        divs.append(E)
        es.append((E.e1, E.e2))
        dist.append((abs(E.e1 - X.E0.e1), abs(E.e2 - X.E0.e2)))
    used = np.array(res) <= max_residual
    if used.sum() < min_points:
        raise ValidationError(f"only {int(used.sum())} sweep points usable, need {min_points}")
    kept = vals[used]
    dk = np.array(dist)[used]
    ek = np.array(es)[used]
    slopes = tuple(_loglog_slope(kept, dk[:, k]) for k in range(2))
    dv = -np.diff(kept)
    mid = np.sqrt(kept[:-1] * kept[1:])
    dslopes = tuple(_loglog_slope(mid, np.abs(np.diff(ek[:, k])) / dv) for k in range(2))
    return CuspFit(sign, tuple(vals), tuple(map(tuple, dist)), slopes, dslopes, tuple(divs),
                   tuple(res), tuple(bool(u) for u in used))
