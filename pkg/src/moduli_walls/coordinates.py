"""Forward map, Newton inverse, wall location and continuation.

Weights are read off the abelian integral at the graph vertices:

* GammaZero: eta(z) = W, eta(e1) = i H1, eta(e2) = -i H2;
* GammaPlus: eta(z+) = W + i H0, eta(e1) = i (H0 + H1), eta(e2) = i (H0 - H2);
* GammaMinus: eta(z_a) = W2, eta(z_b) = W1 for the real zeros z_a < z_b,
  and H1, H2 as on the wall.

The integral is evaluated along graph-anchored paths: along the upper bank
of (1, inf) to the critical point, then straight to the target. Every
non-real leg is checked against the slit system and replaced by a routed
path if it would cross a slit.
"""

import numpy as np
from scipy.optimize import brentq

from .abelian import _slits, eta, normalize
from .cells import FIELDS, WALL_TOL, CellCoordinates, GraphType, critical_points
from .curve import BranchDivisor, base_constant
from .errors import (DegenerateSystem, ModuliWallsError, NoBracket, NoConvergence,
                     UnsupportedConfiguration, ValidationError, WeightOutOfRange, WrongCell)
from .quadrature import line_integral
from .slits import segments_intersect

_ROOT_INDEX = {1: 2, 2: 4}


def _leg(D, a, wa, b, start_root=None, end_root=None):
    val, wb = line_integral(D.numerator, D.roots, a, b, wa, start_root=start_root, end_root=end_root)
    return complex(val[0]), wb


def _leg_clear(E, p, q):
    for a, b in _slits(E).all_segments():
        if segments_intersect(p, q, a, b):
            return False
    return True


def _eta_real(D, x):
    """eta and w at real x > 1 on the upper bank of (1, inf)."""
    return _leg(D, 1.0, base_constant(D.roots), complex(x), start_root=0)


def _eta_branch_points(D, anchor, eta_anchor, w_anchor):
    out = []
    for s in (1, 2):
        e = D.E.e1 if s == 1 else D.E.e2
        if _leg_clear(D.E, anchor, e):
            val, _ = _leg(D, anchor, w_anchor, e, end_root=_ROOT_INDEX[s])
            out.append(eta_anchor + val)
        else:
            out.append(eta(D, e))
    return out


def cell_values(E, kind, D=None):
    """Raw weights of ``kind`` at ``E`` without admissibility checks.

    For ``GammaZero`` the wall point z is taken as -a/2 even off the wall,
    which makes the values smooth across it; the returned extras include
    the discriminant.

    Returns
    -------
    coords : CellCoordinates
    extras : dict
        Differential, critical set and eta values used.
    """
    kind = GraphType(kind)
    if D is None:
        D = normalize(E, check=False)
    cs = critical_points(D)
    extras = {"D": D, "critical": cs, "dsc": cs.dsc}
    if kind is GraphType.GammaZero:
        z = -0.5 * D.a
        if not z > 1:
            raise UnsupportedConfiguration(f"double zero {z:.6g} is not on (1, inf)")
        ez, wz = _eta_real(D, z)
        e1v, e2v = _eta_branch_points(D, complex(z), ez, wz)
        extras.update(z=z, eta_z=ez, eta_e1=e1v, eta_e2=e2v)
        vals = {"H1": e1v.imag, "H2": -e2v.imag, "W": ez.real}
    elif kind is GraphType.GammaPlus:
        if cs.dsc >= 0:
            raise WrongCell("critical points are real, not a conjugate pair")
        zp = cs.z1
        x0 = zp.real
        if x0 > 1:
            e0, w0 = _eta_real(D, x0)
            if _leg_clear(E, complex(x0), zp):
                v, wz = _leg(D, complex(x0), w0, zp)
                ez = e0 + v
            else:
                ez, wz = eta(D, zp), None
        else:
            ez, wz = eta(D, zp), None
        if wz is None:
            from .abelian import w_at
            wz = w_at(E, zp)
        e1v, e2v = _eta_branch_points(D, zp, ez, wz)
        H0 = ez.imag
        extras.update(z=zp, eta_z=ez, eta_e1=e1v, eta_e2=e2v)
        vals = {"H0": H0, "H1": e1v.imag - H0, "H2": H0 - e2v.imag, "W": ez.real}
    elif kind is GraphType.GammaMinus:
        if cs.dsc <= 0:
            raise WrongCell("critical points are not a real pair")
        za, zb = cs.z1.real, cs.z2.real
        if not za > 1:
            raise UnsupportedConfiguration("real critical points are not both on (1, inf)")
        ea, wa = _eta_real(D, za)
        v, wb = _leg(D, complex(za), wa, complex(zb))
        eb = ea + v
        e1v, e2v = _eta_branch_points(D, complex(zb), eb, wb)
        extras.update(z=(za, zb), eta_z=(ea, eb), eta_e1=e1v, eta_e2=e2v)
        vals = {"H1": e1v.imag, "H2": -e2v.imag, "W1": eb.real, "W2": ea.real}
    else:
        raise ValidationError("no coordinates for Unsupported")
    return CellCoordinates.make(kind, **vals), extras


def candidate_type(D, wall_tol=WALL_TOL):
    """Graph type suggested by the discriminant alone."""
    dsc = critical_points(D).dsc
    if abs(dsc) <= wall_tol:
        return GraphType.GammaZero
    return GraphType.GammaPlus if dsc < 0 else GraphType.GammaMinus


def classify(D, wall_tol=WALL_TOL):
    """Graph type of the differential, confirmed by admissible weights.

    Returns :attr:`GraphType.Unsupported` when the discriminant suggests a
    cell whose weights cannot be extracted or violate its inequalities.
    """
    kind = candidate_type(D, wall_tol)
    try:
        coords, _ = cell_values(D.E, kind, D)
    except ModuliWallsError:
        return GraphType.Unsupported
    return kind if not coords.violations() else GraphType.Unsupported


def forward(E, wall_tol=WALL_TOL):
    """Graph type and weights of the curve with branch divisor ``E``.

    Raises
    ------
    UnsupportedConfiguration
        If the critical points do not fit one of the three supported cells.
    WeightOutOfRange
        If extracted weights violate the polyhedron of the candidate cell.
    """
    D = normalize(E, check=False)
    kind = candidate_type(D, wall_tol)
    coords, _ = cell_values(E, kind, D)
    coords.validate()
    return kind, coords


def label_divisor(E, wall_tol=WALL_TOL):
    """Return ``E`` or ``E.swapped()`` so that Im eta(e1) > 0 > Im eta(e2).

    Raises
    ------
    WeightOutOfRange
        If neither labeling gives the required signs.
    """
    for cand in (E, E.swapped()):
        try:
            D = normalize(cand, check=False)
            kind = candidate_type(D, wall_tol)
            _, ex = cell_values(cand, kind, D)
        except ModuliWallsError:
            continue
        if ex["eta_e1"].imag > 0 > ex["eta_e2"].imag:
            return cand
    raise WeightOutOfRange("no labeling gives Im eta(e1) > 0 > Im eta(e2)")


# ---------------------------------------------------------------- inverse


def _residual(x, target, kind):
    E = BranchDivisor.from_vector(x)
    coords, ex = cell_values(E, kind)
    r = coords.vector - target.vector
    if kind is GraphType.GammaZero:
        r = np.append(r, ex["dsc"])
    return r


def _valid_point(x):
    return x[1] > 0 and x[3] > 0 and abs(complex(x[0], x[1]) - complex(x[2], x[3])) > 1e-9


def inverse(target, guess, *, tol=1e-10, max_iter=50, max_halvings=20, fd_step=1e-6):
    """Branch divisor whose weights equal ``target``.

    Damped Newton on the four real coordinates of (e1, e2) with a
    forward-difference Jacobian (central differences after a failed line
    search). For GammaZero targets the fourth equation is Dsc = 0.

    Parameters
    ----------
    target : CellCoordinates
    guess : BranchDivisor
    tol : float
        Convergence threshold on the max-norm of the residual.

    Raises
    ------
    WeightOutOfRange
        If the target lies outside its polyhedron (checked before iterating).
    NoConvergence
        After ``max_iter`` iterations.
    WrongCell
        If no damped step stays inside the target's cell.
    """
    target.validate()
    kind = target.kind
    x = guess.as_vector().astype(float)
    try:
        r = _residual(x, target, kind)
    except (WrongCell, UnsupportedConfiguration, DegenerateSystem) as exc:
        raise WrongCell(f"guess is not in cell {kind.value}: {exc}") from exc
    nr = np.max(np.abs(r))
    central = False
    for _ in range(max_iter):
        if nr < tol:
            return BranchDivisor.from_vector(_polish(x, r, nr, target, kind, fd_step))
        J = _jacobian(x, r, target, kind, fd_step, central)
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        accepted = False
        for _h in range(max_halvings + 1):
            xn = x + lam * dx
            if _valid_point(xn):
                try:
                    rn = _residual(xn, target, kind)
                    nrn = np.max(np.abs(rn))
                    if nrn < nr or nrn < tol:
                        accepted = True
                        break
                except (WrongCell, UnsupportedConfiguration, DegenerateSystem, NoConvergence):
                    pass
            lam *= 0.5
        if not accepted:
            if not central:
                central = True
                continue
            raise WrongCell(f"line search failed to stay in {kind.value} (residual {nr:.3g})")
        x, r, nr = xn, rn, nrn
        central = False
    if nr < tol:
        return BranchDivisor.from_vector(_polish(x, r, nr, target, kind, fd_step))
    raise NoConvergence(f"Newton did not converge in {max_iter} iterations (residual {nr:.3g})")


def _polish(x, r, nr, target, kind, step):
    """One extra Newton step once the residual is below tolerance.

    The divisor error is roughly cond(J) times the residual, so stopping at
    the first iterate under ``tol`` can leave it 100 times larger. The step
    is kept only if it lowers the residual.
    """
    if nr == 0:
        return x
    try:
        J = _jacobian(x, r, target, kind, step, True)
        xn = x + np.linalg.solve(J, -r)
        if _valid_point(xn) and np.max(np.abs(_residual(xn, target, kind))) < nr:
            return xn
    except (np.linalg.LinAlgError, ModuliWallsError):
        pass
    return x


def _jacobian(x, r, target, kind, step, central):
    J = np.empty((r.size, 4))
    for k in range(4):
        h = step * (1.0 + abs(x[k]))
        e = np.zeros(4)
        e[k] = h
        if central:
            J[:, k] = (_residual(x + e, target, kind) - _residual(x - e, target, kind)) / (2 * h)
        else:
            J[:, k] = (_residual(x + e, target, kind) - r) / h
    return J


def discriminant(E):
    """Discriminant a**2 - 4b of the distinguished differential."""
    return critical_points(normalize(E, check=False)).dsc


def find_wall(seed, *, search=(0.5, 2.0), tol=1e-12, max_expand=8):
    """Move Im e2 of ``seed`` until the discriminant vanishes.

    The bracket starts at ``Im e2 * search`` and widens geometrically.

    Raises
    ------
    NoBracket
        If no sign change of the discriminant is found.
    """
    d0 = discriminant(seed)
    if abs(d0) < tol:
        return seed
    e1, e2 = seed.e1, seed.e2

    def f(t):
        return discriminant(BranchDivisor(e1, complex(e2.real, t)))

    t0 = e2.imag
    lo, hi = t0 * search[0], t0 * search[1]
    grid = None
    for k in range(max_expand):
        grid = np.linspace(lo, hi, 17 + 8 * k)
        vals = []
        for t in grid:
            try:
                vals.append(f(t))
            except ModuliWallsError:
                vals.append(np.nan)
        vals = np.array(vals)
        # the bracket closest to the seed
        idx = [i for i in range(len(grid) - 1)
               if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0]
        if idx:
            i = min(idx, key=lambda i: abs(0.5 * (grid[i] + grid[i + 1]) - t0))
            t = brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            E0 = BranchDivisor(e1, complex(e2.real, t))
            if abs(discriminant(E0)) > tol:
                # polish with secant steps
                t1 = t * (1 + 1e-9)
                for _ in range(20):
                    d, d1 = f(t), f(t1)
                    if abs(d) < tol or d1 == d:
                        break
                    t, t1 = t1 - d1 * (t1 - t) / (d1 - d), t
                E0 = BranchDivisor(e1, complex(e2.real, t))
                if abs(discriminant(E0)) > tol:
                    raise NoConvergence(f"wall residual {discriminant(E0):.3g} above {tol}")
            return E0
        lo, hi = lo * 0.7, hi * 1.5
    raise NoBracket("discriminant does not change sign along the Im e2 search interval")


def continue_path(start, path, *, max_step=None, tol=1e-10):
    """Solve a sequence of targets, warm-starting each from the previous solution.

    Raises
    ------
    NoConvergence
        With ``index`` set to the failing step.
    """
    if max_step is not None:
        for i in range(1, len(path)):
            a, b = path[i - 1], path[i]
            if a.kind is b.kind and np.max(np.abs(a.vector - b.vector)) > max_step:
                raise ValidationError(f"targets {i - 1} and {i} differ by more than {max_step}")
    out = []
    guess = start
    for i, tgt in enumerate(path):
        try:
            guess = inverse(tgt, guess, tol=tol)
        except (NoConvergence, WrongCell) as exc:
            raise NoConvergence(f"continuation failed at step {i}: {exc}", index=i) from exc
        out.append(guess)
    return out


__all__ = [
    "FIELDS", "cell_values", "candidate_type", "classify", "forward", "label_divisor",
    "inverse", "find_wall", "continue_path", "discriminant", "WeightOutOfRange",
]
