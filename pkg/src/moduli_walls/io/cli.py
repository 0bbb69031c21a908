"""Command-line front end: ``moduli-walls <command> [options]``.

Exit codes: 0 success, 1 usage or validation error, 2 infeasible or
unsupported input, 3 numerical failure.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..abelian import normalize
from ..asymptotics import (DEFAULT_SIGNS, Displacement, cusp_exponent, displaced_target,
                           displacement_solutions, expansion_data, h_from_value,
                           predict_displacement, select_signs)
from ..cells import CellCoordinates, GraphType
from ..coordinates import cell_values, discriminant, find_wall, forward, inverse
from ..curve import BranchDivisor
from ..errors import ModuliWallsError, ValidationError
from ..foliation import build_graph
from ..render import RenderOptions, render_svg
from .serialize import csv_text, dumps

COMMANDS = ("forward", "inverse", "wall", "verify", "sweep", "render")
DEFAULTS = {"tol": 1e-10, "h_min": 1e-6, "h_max": 1e-3, "h_ratio": 2.0, "seed": 0,
            "h_values": [0.05, 0.025, 0.0125], "dA_values": [0.02, 0.01, 0.005],
            "dA_direction": [1.0, 0.5, 0.3]}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"usage error: {message}") from None


def _parser():
    p = _Parser(prog="moduli-walls", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file; flags override its entries")
    p.add_argument("--out", help="output directory")
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int, help="RNG seed for random test sets")
    p.add_argument("--h-min", dest="h_min", type=float)
    p.add_argument("--h-max", dest="h_max", type=float)
    p.add_argument("--h-ratio", dest="h_ratio", type=float)
    p.add_argument("--divisor", help="Re e1,Im e1,Re e2,Im e2")
    p.add_argument("--guess", help="Re e1,Im e1,Re e2,Im e2")
    p.add_argument("--weights", help="cell coordinates as JSON, with a 'type' tag")
    p.add_argument("--random", type=int, help="forward: number of random divisors")
    p.add_argument("--sign", type=int, choices=(1, -1), help="sweep: side of the wall")
    return p


def _divisor(v, what):
    if v is None:
        raise ValidationError(f"missing {what}")
    if isinstance(v, BranchDivisor):
        return v
    if isinstance(v, dict):
        return BranchDivisor.from_json(v)
    if isinstance(v, str):
        try:
            v = [float(t) for t in v.split(",")]
        except ValueError as exc:
            raise ValidationError(f"cannot parse {what}: {v!r}") from exc
    if len(v) != 4:
        raise ValidationError(f"{what} needs four numbers")
    return BranchDivisor.from_vector(v)


def load_config(args):
    """Merge defaults, the config file and command-line flags (in that order)."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
    for key in ("out", "tol", "seed", "h_min", "h_max", "h_ratio", "divisor", "guess",
                "random", "sign"):
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    if args.weights is not None:
        try:
            cfg["weights"] = json.loads(args.weights)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"cannot parse weights: {exc}") from exc
    for key in ("tol", "h_min", "h_max"):
        if not float(cfg[key]) > 0:
            raise ValidationError(f"{key} must be positive")
    if not float(cfg["h_ratio"]) > 1:
        raise ValidationError("h_ratio must exceed 1")
    if not cfg["h_min"] < cfg["h_max"]:
        raise ValidationError("h_min must be below h_max")
    return cfg


def _threads():
    try:
        return max(1, int(os.environ.get("MODULI_WALLS_THREADS", "1")))
    except ValueError:
        return 1


def sweep_grid(cfg):
    """Geometric grid from h_max down to h_min with ratio h_ratio."""
    hmax, hmin, r = float(cfg["h_max"]), float(cfg["h_min"]), float(cfg["h_ratio"])
    n = int(np.floor(np.log(hmax / hmin) / np.log(r) + 1e-9)) + 1
    return hmax / r ** np.arange(n)


def _forward_record(E):
    D = normalize(E)
    kind, coords = forward(E)
    return {"divisor": E.to_json(), "type": kind.value, "weights": coords.to_json(),
            "differential": D.to_json()}


def cmd_forward(cfg):
    if cfg.get("random"):
        rng = np.random.default_rng(int(cfg["seed"]))
        out = []
        for _ in range(int(cfg["random"])):
            v = rng.uniform([-2.0, 0.2, -2.0, 0.2], [3.0, 2.0, 3.0, 2.0])
            E = BranchDivisor.from_vector(v)
            try:
                out.append(_forward_record(E))
            except ModuliWallsError as exc:
                out.append({"divisor": E.to_json(), "type": GraphType.Unsupported.value,
                            "reason": str(exc)})
        return {"results": out}
    return _forward_record(_divisor(cfg.get("divisor"), "divisor"))


def cmd_inverse(cfg):
    if "weights" not in cfg:
        raise ValidationError("missing weights")
    target = CellCoordinates.from_json(cfg["weights"])
    guess = _divisor(cfg.get("guess"), "guess")
    E = inverse(target, guess, tol=float(cfg["tol"]))
    coords, ex = cell_values(E, target.kind)
    res = float(np.max(np.abs(coords.vector - target.vector)))
    if target.kind is GraphType.GammaZero:
        res = max(res, abs(ex["dsc"]))
    return {"divisor": E.to_json(), "weights": coords.to_json(), "residual": res}


def cmd_wall(cfg):
    seed = _divisor(cfg.get("divisor"), "seed divisor")
    E0 = find_wall(seed)
    rec = _forward_record(E0)
    rec["dsc"] = discriminant(E0)
    return rec


def _cusp_table(X, sign, grid):
    """Solve the sweep and return the fit plus CSV rows."""
    fit = cusp_exponent(X, sign, grid)
    rows = []
    for v, E, res in zip(fit.values, fit.divisors, fit.residuals):
        h = h_from_value(sign, v)
        coords, _ = cell_values(E, displaced_target(X.A0, Displacement(h=h, sign=sign)).kind)
        rows.append([h, v, *coords.values, E.e1.real, E.e1.imag, E.e2.real, E.e2.imag, res])
    return fit, rows


def _csv_header(sign):
    names = ["H0", "H1", "H2", "W"] if sign > 0 else ["H1", "H2", "W1", "W2"]
    first = "H0" if sign > 0 else "W2_minus_W1"
    return ["h", first, *names, "e1_re", "e1_im", "e2_re", "e2_im", "residual"]


def cmd_sweep(cfg):
    E0 = find_wall(_divisor(cfg.get("divisor"), "seed divisor"))
    X = expansion_data(E0)
    grid = sweep_grid(cfg)
    signs = (int(cfg["sign"]),) if cfg.get("sign") else (1, -1)
    report = {"wall": E0.to_json(), "grid": list(grid), "fits": {}}
    files = {}
    for s in signs:
        fit, rows = _cusp_table(X, s, grid)
        report["fits"]["plus" if s > 0 else "minus"] = fit.to_json()
        files[f"sweep_{'plus' if s > 0 else 'minus'}.csv"] = csv_text(_csv_header(s), rows)
    return report, files


def cmd_verify(cfg):
    E0 = find_wall(_divisor(cfg.get("divisor"), "seed divisor"))
    X = expansion_data(E0)
    hv = [float(h) for h in cfg["h_values"]]
    da = [float(t) for t in cfg["dA_values"]]
    sols = displacement_solutions(X, hv, da, cfg["dA_direction"])
    best, table = select_signs(X, hv, da, sols)
    rh, ra = table[best]
    coherent = bool(np.all((rh >= 8) & (rh <= 32)) and np.all((ra >= 2.8) & (ra <= 5.7)))
    checks = []
    for key, rows in sols.items():
        for d, act in rows:
            pred = [predict_displacement(X, s, d, best) for s in (1, 2)]
            checks.append({"displacement": {"dH1": d.dH1, "dH2": d.dH2, "dW": d.dW, "h": d.h,
                                            "sign": d.sign},
                           "actual": list(act), "predicted": pred,
                           "residuals": [abs(a - p) for a, p in zip(act, pred)]})
    grid = sweep_grid(cfg)
    with ThreadPoolExecutor(max_workers=min(2, _threads())) as ex:
        fits = list(ex.map(lambda s: _cusp_table(X, s, grid), (1, -1)))
    (fp, rows_p), (fm, rows_m) = fits
    # matched sweeps: same h on both sides
    matched = []
    by_h_minus = {round(r[0], 15): r for r in rows_m}
    for r in rows_p:
        m = by_h_minus.get(round(r[0], 15))
        if m is not None:
            matched.append([r[0], abs(complex(r[-5], r[-4]) - complex(m[-5], m[-4])),
                            abs(complex(r[-3], r[-2]) - complex(m[-3], m[-2]))])
    graphs = {}
    for name, key in (("GammaZero", None), ("GammaPlus", ("h", 1)), ("GammaMinus", ("h", -1))):
        E = E0
        if key is not None:
            _, act = sols[key][0]
            E = BranchDivisor(E0.e1 + act[0], E0.e2 + act[1])
        graphs[name] = build_graph(E)
    report = {
        "wall": E0.to_json(),
        "expansion": X.to_json(),
        "signs": {"selected": list(best), "canonical": list(DEFAULT_SIGNS),
                  "coherent": coherent,
                  "h_ratios": rh, "dA_ratios": ra},
        "checks": checks,
        "cusp": {"plus": fp.to_json(), "minus": fm.to_json()},
        "continuity": [{"h": r[0], "e1": r[1], "e2": r[2]} for r in matched],
        "graphs": {k: {"type": G.kind.value, "weights": G.weights,
                       "ord_mismatches": G.ord_mismatches()} for k, G in graphs.items()},
    }
    files = {"sweep_plus.csv": csv_text(_csv_header(1), rows_p),
             "sweep_minus.csv": csv_text(_csv_header(-1), rows_m)}
    for k, G in graphs.items():
        files[f"graph_{k}.svg"] = render_svg(G, RenderOptions(title=k))
    return report, files


def cmd_render(cfg):
    E = _divisor(cfg.get("divisor"), "divisor")
    G = build_graph(E)
    return G.to_json(), {"graph.svg": render_svg(G, RenderOptions(title=G.kind.value))}


def run(argv=None, stdout=None):
    """Entry point returning the exit code instead of exiting."""
    stdout = stdout or sys.stdout
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            print(exc.code if isinstance(exc.code, str) else "usage error", file=sys.stderr)
            return 1
        return 0
    try:
        cfg = load_config(args)
        fn = {"forward": cmd_forward, "inverse": cmd_inverse, "wall": cmd_wall,
              "verify": cmd_verify, "sweep": cmd_sweep, "render": cmd_render}[args.command]
        result = fn(cfg)
    except ModuliWallsError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    report, files = result if isinstance(result, tuple) else (result, {})
    text = dumps(report)
    out = cfg.get("out")
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{args.command}.json").write_text(text)
        for name, content in files.items():
            (d / name).write_text(content)
    elif args.command == "render" and files:
        stdout.write(files["graph.svg"])
        return 0
    stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
