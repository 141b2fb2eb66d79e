"""``fracdense`` command line: reproducible experiments that write CSV and SVG files.

Exit codes: 0 success, 1 numerical failure (the violated tolerance is
named), 2 invalid arguments or configuration.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from ._errors import ConsistencyError, ConvergenceError, QuadratureError

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class CheckFailed(RuntimeError):
    """A computed quantity missed its tolerance."""

    def __init__(self, what: str, value: float, tol: float) -> None:
        super().__init__(f"{what} = {value:.3e} exceeds tolerance {tol:g}")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    type: Callable[[str], Any]
    default: Any
    help: str


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any]
    out_dir: Path
    seed: int = 0
    jobs: int = 1
    stdout: Any = field(default=sys.stdout, repr=False)

    def emit(self, key: str, value: Any) -> None:
        if isinstance(value, float):
            value = f"{value:.12g}"
        print(f"{key} = {value}", file=self.stdout)


# ------------------------------------------------------------------ output


def fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_svg(path: Path, x: np.ndarray, ys: Sequence[np.ndarray], labels: Sequence[str] = (), title: str = "") -> Path:
    """Polyline plot with a frame, axis ranges and an optional legend."""
    W, H, pad = 480, 320, 48
    x = np.asarray(x, dtype=float)
    allv = np.concatenate([np.asarray(y, dtype=float) for y in ys])
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(np.min(allv)), float(np.max(allv))
    if y1 == y0:
        y1 = y0 + 1.0
    sx = lambda v: pad + (v - x0) / (x1 - x0) * (W - 2 * pad)  # noqa: E731
    sy = lambda v: H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad)  # noqa: E731
    colors = ("#1f4e9c", "#b5361c", "#2f7d32", "#6a3d9a")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="{pad}" y="{pad}" width="{W - 2 * pad}" height="{H - 2 * pad}" fill="none" stroke="#000"/>',
        f'<text x="{pad}" y="{H - pad + 16}" font-size="11">{x0:.3g}</text>',
        f'<text x="{W - pad}" y="{H - pad + 16}" font-size="11" text-anchor="end">{x1:.3g}</text>',
        f'<text x="{pad - 4}" y="{H - pad}" font-size="11" text-anchor="end">{y0:.3g}</text>',
        f'<text x="{pad - 4}" y="{pad + 10}" font-size="11" text-anchor="end">{y1:.3g}</text>',
    ]
    if title:
        parts.append(f'<text x="{W / 2}" y="{pad - 14}" font-size="13" text-anchor="middle">{title}</text>')
    for i, y in enumerate(ys):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, np.asarray(y, dtype=float)))
        col = colors[i % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        if i < len(labels):
            parts.append(f'<text x="{W - pad - 4}" y="{pad + 16 + 14 * i}" font-size="11" fill="{col}" text-anchor="end">{labels[i]}</text>')
    parts.append("</svg>")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
    return path


def pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    """Ordered map, threaded when ``jobs > 1``."""
    if jobs <= 1:
        return [fn(v) for v in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


# ------------------------------------------------------------------ commands


def cmd_ml_plot(cfg: RunConfig) -> None:
    from .specialfn import MLParams, mittag_leffler_array

    p = cfg.params
    t = np.linspace(0.0, p["tmax"], p["points"])
    E = mittag_leffler_array(MLParams(p["alpha"], p["beta"]), p["lam"] * t ** p["alpha"])
    write_csv(cfg.out_dir / "ml.csv", ["t", "E"], zip(t, E))
    title = f"E_({p['alpha']:g},{p['beta']:g})({p['lam']:g} t^{p['alpha']:g})"
    write_svg(cfg.out_dir / "ml.svg", t, [E], title=title)
    cfg.emit("E(tmax)", float(E[-1]))


def cmd_caputo_check(cfg: RunConfig) -> None:
    from .caputo import ml_eigen_check

    p = cfg.params
    ts = np.linspace(p["tmin"], p["tmax"], p["points"])
    res = pmap(lambda t: ml_eigen_check(p["alpha"], p["lam"], 0.0, [t]), ts, cfg.jobs)
    write_csv(cfg.out_dir / "caputo_check.csv", ["t", "relative_residual"], zip(ts, res))
    worst = float(max(res))
    cfg.emit("max_relative_residual", worst)
    if worst > p["tol"]:
        raise CheckFailed("Caputo eigen-relation residual", worst, p["tol"])


def cmd_symbol_check(cfg: RunConfig) -> None:
    from .fraclap import HypersingularSpec, frac_laplacian, plane_wave

    p = cfg.params
    spec = HypersingularSpec(n=p["n"], s=p["s"])
    x0 = 0.0 if p["n"] == 1 else np.zeros(2)

    def one(xi: float) -> tuple[float, float, float, float]:
        u, R = plane_wave(xi, p["n"])
        val = frac_laplacian(spec, u, x0, support=R)
        exact = abs(xi) ** (2 * p["s"])
        return xi, val, exact, abs(val / exact - 1.0)

    rows = pmap(one, p["xis"], cfg.jobs)
    write_csv(cfg.out_dir / "symbol.csv", ["xi", "value", "exact", "relative_error"], rows)
    worst = max(r[3] for r in rows)
    cfg.emit("constant", spec.constant)
    cfg.emit("max_relative_error", worst)
    if worst > p["tol"]:
        raise CheckFailed("symbol relative error", worst, p["tol"])


GREEN_SOURCES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": lambda x: np.ones_like(np.asarray(x, dtype=float)),
    "x2": lambda x: np.asarray(x, dtype=float) ** 2,
    "cos2x": lambda x: np.cos(2.0 * np.asarray(x, dtype=float)),
}


def cmd_green_solve(cfg: RunConfig) -> None:
    from .ball import GreenKernel, green_solution
    from .eigen import boundary_exponent_fit
    from .fraclap import HypersingularSpec, frac_laplacian

    p = cfg.params
    if p["f"] not in GREEN_SOURCES:
        raise UsageError(f"f must be one of {sorted(GREEN_SOURCES)}")
    f = GREEN_SOURCES[p["f"]]
    g = GreenKernel(1, p["s"])
    u = green_solution(g, f)
    spec = HypersingularSpec(1, p["s"])
    xs = np.linspace(-0.8, 0.8, p["points"])
    lap = pmap(lambda x: frac_laplacian(spec, u, float(x), support=1.0, breakpoints=(-1.0, 1.0)), xs, cfg.jobs)
    rows = [(x, float(u(np.array([x]))[0]), L, float(f(np.array([x]))[0])) for x, L in zip(xs, lap)]
    write_csv(cfg.out_dir / "green.csv", ["x", "u", "frac_laplacian_u", "f"], rows)
    err = max(abs(r[2] - r[3]) for r in rows)
    slope = boundary_exponent_fit(u, (1e-4, 1e-2))[0]
    cfg.emit("max_inverse_error", err)
    cfg.emit("boundary_slope", slope)
    if err > p["tol"]:
        raise CheckFailed("Green inverse error", err, p["tol"])
    if abs(slope - p["s"]) > p["slope_tol"]:
        raise CheckFailed("boundary slope deviation", abs(slope - p["s"]), p["slope_tol"])


def cmd_eigen(cfg: RunConfig) -> None:
    from .ball import GreenKernel
    from .eigen import power_iterate

    p = cfg.params
    res = power_iterate(GreenKernel(p["n"], p["s"]), n_nodes=p["grid"])
    x = res.phi.grid
    write_csv(cfg.out_dir / "phi.csv", ["x", "phi"], zip(x, res.phi.values))
    cfg.emit("lambda1", res.lambda1)
    cfg.emit("boundary_slope", res.boundary_slope)
    cfg.emit("iterations", res.iterations)
    dev = abs(res.boundary_slope - p["s"])
    if dev > p["slope_tol"]:
        raise CheckFailed("boundary slope deviation", dev, p["slope_tol"])


def cmd_bump(cfg: RunConfig) -> None:
    from .approx import blowup_sequence, build_bump
    from .ball import PoissonKernel
    from .eigen import boundary_exponent_fit

    p = cfg.params
    psi = build_bump(PoissonKernel(1, p["s"]))
    x = np.linspace(-3.0, 3.0, p["points"])
    write_csv(cfg.out_dir / "bump.csv", ["x", "psi"], zip(x, psi(x)))
    slope = boundary_exponent_fit(psi, (1e-3, 1e-1))[0]
    bl = blowup_sequence(psi, 1.0, p["js"])
    write_csv(cfg.out_dir / "blowup.csv", ["j", "l1_distance"], zip(bl.js.astype(int), bl.l1_distances))
    cfg.emit("boundary_slope", slope)
    cfg.emit("kappa", bl.kappa)
    cfg.emit("l1_distances", " ".join(f"{d:.6g}" for d in bl.l1_distances))
    if abs(slope - p["s"]) > p["slope_tol"]:
        raise CheckFailed("bump boundary slope deviation", abs(slope - p["s"]), p["slope_tol"])
    if np.any(np.diff(bl.l1_distances) >= 0):
        raise CheckFailed("blow-up distance increase", float(np.max(np.diff(bl.l1_distances))), 0.0)


FIT_TARGETS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "x2": lambda x: np.asarray(x, dtype=float) ** 2,
    "sin3x": lambda x: np.sin(3.0 * np.asarray(x, dtype=float)),
    "abs3": lambda x: np.abs(np.asarray(x, dtype=float)) ** 3,
}


def _collocation(rho: float, count: int, jitter: float, seed: int) -> np.ndarray:
    x = np.linspace(-rho, rho, count)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        h = x[1] - x[0]
        x[1:-1] += jitter * h * rng.uniform(-0.5, 0.5, count - 2)
    return x


def cmd_density_fit(cfg: RunConfig) -> None:
    from .approx import ExteriorBasis, fit_sharmonic

    p = cfg.params
    if p["target"] not in FIT_TARGETS:
        raise UsageError(f"target must be one of {sorted(FIT_TARGETS)}")
    f = FIT_TARGETS[p["target"]]
    basis = ExteriorBasis.two_sided(p["s"], p["basis"], R=p["R"])
    colloc = _collocation(p["rho"], p["colloc"], p["jitter"], cfg.seed)
    ridge = None if p["ridge"] < 0 else p["ridge"]
    u, rep = fit_sharmonic(f, basis, colloc, ridge)
    x = np.linspace(-p["rho"], p["rho"], 201)
    write_csv(cfg.out_dir / "density_fit.csv", ["x", "u", "target"], zip(x, u(x), f(x)))
    write_svg(cfg.out_dir / "density_fit.svg", x, [u(x), f(x)], ["fit", "target"])
    cfg.emit("sup_error", rep.sup_error)
    cfg.emit("sharmonicity_residual", rep.sharmonicity_residual)
    cfg.emit("condition_estimate", rep.condition_estimate)
    if rep.sup_error > p["tol"]:
        raise CheckFailed("fit sup error", rep.sup_error, p["tol"])


def cmd_harnack(cfg: RunConfig) -> None:
    from .approx import harnack_demo

    p = cfg.params
    demo = harnack_demo(p["s"], p["r"], p["rho"], p["basis"])
    x = np.linspace(-1.0, 1.0, 401)
    write_csv(cfg.out_dir / "harnack.csv", ["x", "u"], zip(x, demo.u(x)))
    cfg.emit("inf_r", demo.inf_r)
    cfg.emit("sup_r", demo.sup_r)
    cfg.emit("ratio", demo.ratio)
    if demo.ratio > p["tol"]:
        raise CheckFailed("Harnack ratio", demo.ratio, p["tol"])


def cmd_tautochrone(cfg: RunConfig) -> None:
    from .apps import SlideProblem, tautochrone_recover

    p = cfg.params
    g, T, kap = p["g"], p["T"], p["kappa"]
    laws = {
        "constant": lambda h: T,
        "sqrt": lambda h: kap * math.sqrt(h),
        "freefall": lambda h: math.sqrt(2.0 * h / g),
    }
    if p["law"] not in laws:
        raise UsageError(f"law must be one of {sorted(laws)}")
    sp = SlideProblem(g, laws[p["law"]], p["hmax"])
    H = np.geomspace(p["hmin"], p["hmax"], p["points"])
    rec = tautochrone_recover(sp, H)
    write_csv(cfg.out_dir / "tautochrone.csv", ["H", "Phi", "phi", "fprime_sq"], zip(H, rec.Phi, rec.phi, rec.fprime_sq))
    cfg.emit("phi_min", float(rec.phi.min()))
    cfg.emit("fprime_sq_mid", float(rec.fprime_sq[len(H) // 2]))


def cmd_comb(cfg: RunConfig) -> None:
    from .apps import CombParams, comb_transfer

    p = cfg.params
    W0, pde, dens = comb_transfer(CombParams(p["s"], p["xi"], p["omega"]))
    write_csv(cfg.out_dir / "comb.csv", ["s", "xi", "omega", "W0", "pde_residual", "density_residual"],
              [(p["s"], p["xi"], p["omega"], W0, pde, dens)])
    cfg.emit("W0", W0)
    cfg.emit("pde_residual", pde)
    cfg.emit("density_residual", dens)
    if pde > 1e-6:
        raise CheckFailed("comb weak-form residual", pde, 1e-6)
    if dens > 1e-12:
        raise CheckFailed("comb density residual", dens, 1e-12)


def cmd_ladder(cfg: RunConfig) -> None:
    from .apps import ladder_cf

    p = cfg.params
    rows = []
    for d in range(1, p["depth"] + 1):
        tr, cl = ladder_cf(p["omega"], d)
        rows.append((d, tr, abs(tr - cl)))
    write_csv(cfg.out_dir / "ladder.csv", ["depth", "truncated", "error"], rows)
    tr, cl = ladder_cf(p["omega"], p["depth"])
    cfg.emit("truncated", tr)
    cfg.emit("closed_form", cl)
    cfg.emit("difference", abs(tr - cl))
    if abs(tr - cl) > p["tol"]:
        raise CheckFailed("continued fraction truncation error", abs(tr - cl), p["tol"])


COMMANDS: dict[str, tuple[Callable[[RunConfig], None], str, dict[str, Param]]] = {
    "ml-plot": (cmd_ml_plot, "Mittag-Leffler curve E_(alpha,beta)(lam t^alpha) on [0, tmax]", {
        "alpha": Param(float, 0.5, "order alpha > 0"),
        "beta": Param(float, 1.0, "second parameter beta"),
        "lam": Param(float, 1.0, "eigenvalue lambda"),
        "tmax": Param(float, 1.0, "right end of the t range"),
        "points": Param(int, 201, "number of samples"),
    }),
    "caputo-check": (cmd_caputo_check, "residual of D^alpha E_(alpha,1)(lam t^alpha) = lam E", {
        "alpha": Param(float, 0.5, "order alpha"),
        "lam": Param(float, 1.0, "eigenvalue lambda"),
        "tmin": Param(float, 0.1, "first time"),
        "tmax": Param(float, 2.0, "last time"),
        "points": Param(int, 20, "number of times"),
        "tol": Param(float, 1e-4, "allowed relative residual"),
    }),
    "symbol-check": (cmd_symbol_check, "fractional Laplacian of windowed plane waves against |xi|^(2s)", {
        "s": Param(float, 0.5, "order s"),
        "n": Param(int, 1, "dimension (1 or 2)"),
        "xis": Param(floats, (0.5, 2.0, 3.0), "comma-separated frequencies"),
        "tol": Param(float, 1e-2, "allowed relative error"),
    }),
    "green-solve": (cmd_green_solve, "Dirichlet solve on the unit interval and its inverse check", {
        "s": Param(float, 0.5, "order s"),
        "f": Param(str, "one", "source: one, x2 or cos2x"),
        "points": Param(int, 5, "interior check points"),
        "tol": Param(float, 1e-2, "allowed inverse error"),
        "slope_tol": Param(float, 0.05, "allowed boundary slope deviation"),
    }),
    "eigen": (cmd_eigen, "first Dirichlet eigenpair on the unit ball", {
        "s": Param(float, 0.5, "order s"),
        "n": Param(int, 1, "dimension (1 or 2)"),
        "grid": Param(int, 256, "Gauss nodes (radial nodes in 2-d)"),
        "slope_tol": Param(float, 0.05, "allowed boundary slope deviation"),
    }),
    "bump": (cmd_bump, "s-harmonic bump and its blow-up sequence", {
        "s": Param(float, 0.5, "order s"),
        "points": Param(int, 601, "samples of psi on [-3, 3]"),
        "js": Param(ints, (4, 8, 16, 32), "comma-separated blow-up factors"),
        "slope_tol": Param(float, 0.05, "allowed boundary slope deviation"),
    }),
    "density-fit": (cmd_density_fit, "least-squares s-harmonic approximation of a target", {
        "s": Param(float, 0.5, "order s"),
        "target": Param(str, "x2", "target: x2, sin3x or abs3"),
        "basis": Param(int, 40, "number of exterior bumps (even)"),
        "R": Param(float, 6.0, "outer support radius"),
        "rho": Param(float, 0.5, "radius of the fitting ball"),
        "colloc": Param(int, 61, "collocation points"),
        "jitter": Param(float, 0.0, "random collocation jitter, in grid spacings"),
        "ridge": Param(float, -1.0, "Tikhonov parameter (negative: automatic)"),
        "tol": Param(float, 1e-2, "allowed sup error"),
    }),
    "harnack": (cmd_harnack, "nonnegative s-harmonic function with a vanishing infimum", {
        "s": Param(float, 0.5, "order s"),
        "r": Param(float, 0.5, "radius of the Harnack ball"),
        "rho": Param(float, 0.5, "fitting radius before rescaling"),
        "basis": Param(int, 80, "number of exterior bumps"),
        "tol": Param(float, 1e-2, "largest acceptable inf/sup ratio"),
    }),
    "tautochrone": (cmd_tautochrone, "slide shape from a descent-time law", {
        "law": Param(str, "constant", "constant, sqrt or freefall"),
        "g": Param(float, 9.81, "gravity"),
        "T": Param(float, 1.0, "descent time for the constant law"),
        "kappa": Param(float, 1.0, "coefficient of the sqrt law"),
        "hmin": Param(float, 0.04, "lowest height"),
        "hmax": Param(float, 1.9, "highest height"),
        "points": Param(int, 400, "geometric grid size"),
    }),
    "comb": (cmd_comb, "comb transfer function and its residuals", {
        "s": Param(float, 0.5, "order s"),
        "xi": Param(float, 1.0, "spatial frequency"),
        "omega": Param(float, 1.0, "Laplace variable"),
    }),
    "ladder": (cmd_ladder, "spring-dashpot continued fraction", {
        "omega": Param(float, 1.0, "Laplace variable"),
        "depth": Param(int, 40, "truncation depth"),
        "tol": Param(float, 1e-10, "allowed truncation error"),
    }),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, summary, params) in COMMANDS.items():
        keys = ", ".join(params)
        sp = sub.add_parser(name, help=summary, description=f"{summary}. Keys: {keys}.")
        for key, prm in params.items():
            sp.add_argument(f"--{key}", type=prm.type, default=None, help=f"{prm.help} (default {prm.default})")
        sp.add_argument("--out", default=None, help="output directory (default: $FRACDENSE_OUT or out)")
        sp.add_argument("--config", default=None, help="key=value file; flags override it")
        sp.add_argument("--seed", type=int, default=None, help="seed for collocation jitter (default 0)")
        sp.add_argument("--jobs", type=int, default=None, help="threads for independent evaluations (default 1)")
    return parser


def read_config(path: str, allowed: dict[str, Param], command: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    extra = {"seed": int, "jobs": int, "out": str}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, val = (v.strip() for v in line.split("=", 1))
            if key in allowed:
                out[key] = allowed[key].type(val)
            elif key in extra:
                out[key] = extra[key](val)
            else:
                raise UsageError(f"{path}:{lineno}: unknown key '{key}' for {command}")
    return out


def resolve(ns: argparse.Namespace, stdout=None) -> RunConfig:
    fn, _, params = COMMANDS[ns.command]
    values = {k: p.default for k, p in params.items()}
    meta: dict[str, Any] = {"seed": 0, "jobs": 1, "out": os.environ.get("FRACDENSE_OUT", "out")}
    if ns.config:
        conf = read_config(ns.config, params, ns.command)
        for k, v in conf.items():
            (meta if k in meta else values)[k] = v
    for k in params:
        v = getattr(ns, k)
        if v is not None:
            values[k] = v
    for k in ("seed", "jobs", "out"):
        v = getattr(ns, k)
        if v is not None:
            meta[k] = v
    if meta["jobs"] < 1:
        raise UsageError("--jobs must be at least 1")
    return RunConfig(ns.command, values, Path(meta["out"]), int(meta["seed"]), int(meta["jobs"]), stdout or sys.stdout)


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    err = sys.stderr
    try:
        cfg = resolve(ns, stdout)
        fn = COMMANDS[cfg.command][0]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fn(cfg)
    except (UsageError, ValueError, OSError) as exc:
        print(f"fracdense {ns.command}: error: {exc}", file=err)
        return EXIT_USAGE
    except (CheckFailed, ConsistencyError, ConvergenceError, QuadratureError) as exc:
        print(f"fracdense {ns.command}: numerical failure: {exc}", file=err)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
