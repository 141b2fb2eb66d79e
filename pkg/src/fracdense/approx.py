"""Constructive local approximation by s-harmonic and Caputo-stationary functions.

Everything here is one-dimensional: the ball is ``(-1, 1)``, exterior data
live on ``1 < |y| < R``, and s-harmonic functions are Poisson extensions of
that data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._errors import AccuracyWarning
from .ball import ExtensionRule, PoissonKernel, harmonic_extension
from .caputo import History, spliced_caputo, stationary_extension
from .fraclap import HypersingularSpec, frac_laplacian
from .quad import integrate_singular_ends
from .sampled import SampledFunction

Func = Callable[[np.ndarray], np.ndarray]

COND_WARN = 1e12
FD_STEP = 1e-3


def smooth_bump(t: np.ndarray) -> np.ndarray:
    """``exp(1 - 1/(1 - t^2))`` on ``|t| < 1``, zero elsewhere (peak value 1)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def interval_bump(lo: float, hi: float) -> Func:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return lambda y: smooth_bump((np.asarray(y, dtype=float) - mid) / half)


def _as_kernel(p: PoissonKernel | float) -> PoissonKernel:
    return p if isinstance(p, PoissonKernel) else PoissonKernel(1, float(p))


def build_bump(
    p: PoissonKernel,
    profile: Func | None = None,
    support: tuple[float, float] = (2.0, 3.0),
    order: int = 64,
    n_grid: int = 601,
) -> SampledFunction:
    """The s-harmonic bump: Poisson extension of ``psi0(y) = (-1)^m profile(|y|)`` plus ``psi0``.

    ``profile`` is a radial function supported in ``support`` (default: the
    smooth bump on ``(2, 3)``).  The result is sampled on ``[-R, R]`` and
    evaluates exactly (extension by a fixed Gauss rule inside the ball,
    ``psi0`` outside).
    """
    if p.n != 1:
        raise ValueError("build_bump is one-dimensional")
    lo, hi = support
    if profile is None:
        profile = interval_bump(lo, hi)
    sign = (-1.0) ** p.m

    def psi0(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        r = np.abs(y)
        return np.where((r > lo) & (r < hi), sign * profile(r), 0.0)

    rule = ExtensionRule.on_intervals(p, [(-hi, -lo), (lo, hi)], order)
    data = psi0(rule.nodes)

    def psi(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        out = psi0(flat)
        inside = np.abs(flat) < 1.0
        if np.any(inside):
            out[inside] = rule.matrix(flat[inside]) @ data
        return out.reshape(x.shape)

    grid = np.linspace(-hi, hi, n_grid)
    return SampledFunction(
        grid, psi(grid), interpolant=psi, meta={"psi0": psi0, "rule": rule, "support": support, "s": p.s}
    )


@dataclass(frozen=True)
class BlowupResult:
    js: np.ndarray
    kappa: float
    l1_distances: np.ndarray
    profiles: tuple[SampledFunction, ...] = field(repr=False)


def blowup_profile(psi: Func, s: float, e: float, j: float) -> Func:
    """``v(x) = j^s psi(x/j - e)``."""
    return lambda x: j**s * psi(np.asarray(x, dtype=float) / j - e)


def blowup_sequence(
    psi: SampledFunction, e: float, js: Sequence[int], s: float | None = None, tol: float = 1e-10
) -> BlowupResult:
    """Rescalings ``j^s psi(x/j - e)`` on ``B_1(e)`` and their ``L^1`` distance to ``kappa (x e)_+^s``.

    ``kappa`` is the ``L^2`` projection of the profile with the largest
    ``j`` onto ``(x e)_+^s``.  Near ``x = 0`` both the profiles and the limit
    behave like ``|x|^s``, which the quadrature absorbs by substitution.
    """
    if e not in (1.0, -1.0, 1, -1):
        raise ValueError("e must be +1 or -1 in one dimension")
    e = float(e)
    if s is None:
        s = float(psi.meta["s"])
    js = np.asarray(sorted(js), dtype=float)
    if np.any(js < 1):
        raise ValueError("j must be at least 1")
    lo, hi = e - 1.0, e + 1.0
    # B_1(e) = (e-1, e+1); x e > 0 on all of it except the end point 0
    profiles = [blowup_profile(psi, s, e, j) for j in js]
    limit = lambda x: np.maximum(np.asarray(x) * e, 0.0) ** s  # noqa: E731
    vJ = profiles[-1]
    gl, gr = (s, 0.0) if e > 0 else (0.0, s)
    num = integrate_singular_ends(lambda x: vJ(x) * limit(x), lo, hi, gl, gr, tol)
    den = integrate_singular_ends(lambda x: limit(x) ** 2, lo, hi, gl, gr, tol)
    kappa = num / den
    dist = np.array(
        [integrate_singular_ends(lambda x, v=v: np.abs(v(x) - kappa * limit(x)), lo, hi, gl, gr, tol) for v in profiles]
    )
    sampled = tuple(
        SampledFunction(np.linspace(lo, hi, 201), v(np.linspace(lo, hi, 201)), interpolant=v) for v in profiles
    )
    return BlowupResult(js, float(kappa), dist, sampled)


@dataclass(frozen=True)
class ExteriorBasis:
    """Smooth bumps on disjoint exterior intervals; each interval is one basis element."""

    s: float
    supports: tuple[tuple[float, float], ...]
    R: float

    def __post_init__(self) -> None:
        if not self.R > 1:
            raise ValueError("R must exceed 1")
        for lo, hi in self.supports:
            if not (lo < hi and (lo >= 1.0 or hi <= -1.0) and max(abs(lo), abs(hi)) <= self.R):
                raise ValueError(f"support ({lo}, {hi}) is not inside 1 < |y| < R")

    @classmethod
    def two_sided(cls, s: float, count: int, r_in: float = 1.0, R: float = 6.0, gap: float = 0.0) -> "ExteriorBasis":
        """``count`` bumps split evenly between ``(r_in, R)`` and ``(-R, -r_in)``."""
        if count < 2 or count % 2:
            raise ValueError("count must be an even number >= 2")
        edges = np.linspace(r_in, R, count // 2 + 1)
        right = [(a + gap, b - gap) for a, b in zip(edges[:-1], edges[1:])]
        left = [(-b, -a) for a, b in right[::-1]]
        return cls(s, tuple(left + right), R)

    def __len__(self) -> int:
        return len(self.supports)

    def profiles(self) -> list[Func]:
        return [interval_bump(lo, hi) for lo, hi in self.supports]

    def kernel(self) -> PoissonKernel:
        return PoissonKernel(1, self.s)

    def rule(self, order: int = 32) -> tuple[ExtensionRule, np.ndarray]:
        """Gauss rule over all supports and the node-by-element data matrix."""
        p = self.kernel()
        rule = ExtensionRule.on_intervals(p, self.supports, order)
        B = np.zeros((len(rule.nodes), len(self)))
        for i, prof in enumerate(self.profiles()):
            B[i * order : (i + 1) * order, i] = prof(rule.nodes[i * order : (i + 1) * order])
        return rule, B

    def features(self, x: np.ndarray, order: int = 32) -> np.ndarray:
        """Extensions of every element at points ``x`` inside the ball, one column each."""
        rule, B = self.rule(order)
        return rule.matrix(x) @ B

    def exterior(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.stack([prof(x) for prof in self.profiles()], axis=-1)


@dataclass(frozen=True)
class FitReport:
    coefficients: np.ndarray
    sup_error: float
    deriv_errors: tuple[float, ...]
    sharmonicity_residual: float
    condition_estimate: float
    extras: dict = field(default_factory=dict, repr=False)


def _ridge_solve(F: np.ndarray, f: np.ndarray, ridge: float | None) -> tuple[np.ndarray, float, float]:
    G = F.T @ F
    if ridge is None:
        ridge = 1e-8 * float(np.max(np.diag(G)))
    M = G + ridge * np.eye(G.shape[0])
    cond = float(np.linalg.cond(M))
    if cond > COND_WARN:
        warnings.warn(f"normal equations are rank deficient (condition {cond:.2e})", AccuracyWarning, stacklevel=3)
    # augmented least squares is better conditioned than forming M
    A = np.vstack([F, math.sqrt(ridge) * np.eye(F.shape[1])])
    b = np.concatenate([f, np.zeros(F.shape[1])])
    c = np.linalg.lstsq(A, b, rcond=None)[0]
    return c, ridge, cond


def _fd_rows(F: Callable[[np.ndarray], np.ndarray], x: np.ndarray, order: int, h: float = FD_STEP) -> np.ndarray:
    # centred finite-difference approximation of the order-th derivative
    coeffs = {1: ([-1, 1], [-0.5, 0.5]), 2: ([-1, 0, 1], [1.0, -2.0, 1.0]), 3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5])}
    if order not in coeffs:
        raise ValueError("derivative matching is implemented up to order 3")
    offs, ws = coeffs[order]
    return sum(w * F(x + o * h) for o, w in zip(offs, ws)) / h**order


def sharmonic_function(basis: ExteriorBasis, c: np.ndarray, order: int = 32) -> Func:
    """``u = sum c_i (extension of b_i + b_i)`` on the whole line."""
    rule, B = basis.rule(order)
    data = B @ c

    def u(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        out = basis.exterior(flat) @ c
        inside = np.abs(flat) < 1.0
        if np.any(inside):
            out[inside] = rule.matrix(flat[inside]) @ data
        return out.reshape(x.shape)

    return u


def sharmonicity_residual(u: Func, basis: ExteriorBasis, points: Sequence[float]) -> float:
    """Largest ``|(-Delta)^s u|`` over ``points`` inside the ball."""
    spec = HypersingularSpec(1, basis.s)
    bps = sorted({-1.0, 1.0} | {b for iv in basis.supports for b in iv})
    return max(abs(frac_laplacian(spec, u, float(x), support=basis.R, breakpoints=bps)) for x in points)


def fit_sharmonic(
    target: Func,
    basis: ExteriorBasis,
    collocation: np.ndarray,
    ridge: float | None = None,
    *,
    ell: int = 0,
    rho: float | None = None,
    check_points: Sequence[float] | None = (-0.8, -0.4, 0.0, 0.4, 0.8),
    n_check: int = 801,
    order: int = 32,
) -> tuple[SampledFunction, FitReport]:
    """Ridge least-squares fit of ``target`` on ``B_rho`` by extensions of exterior bumps.

    Rows are target values at the collocation points and, for ``ell >= 1``,
    centred finite differences (step 1e-3) of orders ``1..ell``.  The ridge
    defaults to ``1e-8`` times the largest diagonal entry of the normal matrix.

    The report gives the sup error on ``n_check`` points of ``B_rho``, the
    sup error of each matched derivative, and the largest ``|(-Delta)^s u|``
    over ``check_points`` (skipped when ``None``).
    """
    x = np.asarray(collocation, dtype=float)
    if rho is None:
        rho = float(np.max(np.abs(x)))
    if not 0 < rho < 1:
        raise ValueError("collocation points must lie in a ball of radius < 1")
    feats = lambda z: basis.features(z, order)  # noqa: E731
    rows = [feats(x)]
    rhs = [target(x)]
    for k in range(1, ell + 1):
        rows.append(_fd_rows(feats, x, k))
        rhs.append(_fd_rows(target, x, k))
    F = np.vstack(rows)
    f = np.concatenate(rhs)
    c, ridge_used, cond = _ridge_solve(F, f, ridge)

    u = sharmonic_function(basis, c, order)
    xc = np.linspace(-rho, rho, n_check)
    sup = float(np.max(np.abs(u(xc) - target(xc))))
    derr = tuple(float(np.max(np.abs(_fd_rows(u, xc, k) - _fd_rows(target, xc, k)))) for k in range(1, ell + 1))
    resid = float("nan") if check_points is None else sharmonicity_residual(u, basis, check_points)
    grid = np.linspace(-basis.R, basis.R, 2001)
    report = FitReport(c, sup, derr, resid, cond, {"ridge": ridge_used, "rho": rho})
    return SampledFunction(grid, u(grid), interpolant=u, meta={"basis": basis}), report


def harnack_gap(u: Func, r: float, n_grid: int = 4001, check_radius: float = 1.0) -> tuple[float, float, float]:
    """``inf`` and ``sup`` of ``u`` over ``B_r`` and their ratio.

    Raises ``ValueError`` if ``u`` dips below ``-1e-6`` on ``B_check_radius``.
    """
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    xs = np.linspace(-check_radius, check_radius, n_grid)
    if float(np.min(u(xs))) < -1e-6:
        raise ValueError("u is negative somewhere in the ball")
    xr = np.linspace(-r, r, n_grid)
    vals = u(xr)
    lo, hi = float(np.min(vals)), float(np.max(vals))
    return lo, hi, (lo / hi if hi > 0 else 1.0)


@dataclass(frozen=True)
class HarnackDemo:
    inf_r: float
    sup_r: float
    ratio: float
    fit: FitReport
    u: Func = field(repr=False)


def harnack_demo(
    s: float = 0.5, r: float = 0.5, rho: float = 0.5, n_basis: int = 80, n_colloc: int = 81
) -> HarnackDemo:
    """A nonnegative s-harmonic function on the ball with ``inf_{B_r} u = 0``.

    Fit ``v ~ x^2`` on ``B_rho``, rescale ``w(x) = v(rho x)/rho^2`` (still
    s-harmonic, now on ``B_(1/rho)``, and close to ``x^2`` on the whole unit
    ball), then subtract the minimum of ``w`` over ``B_(r/2)``.
    """
    basis = ExteriorBasis.two_sided(s, n_basis)
    colloc = np.linspace(-rho, rho, n_colloc)
    v, rep = fit_sharmonic(lambda z: z * z, basis, colloc, check_points=None)
    w = lambda z: v(rho * np.asarray(z, dtype=float)) / rho**2  # noqa: E731
    inner = np.linspace(-0.5 * r, 0.5 * r, 4001)
    shift = float(np.min(w(inner)))
    u = lambda z: w(z) - shift  # noqa: E731
    lo, hi, ratio = harnack_gap(u, r)
    return HarnackDemo(lo, hi, ratio, rep, u)


def polynomial_histories(count: int, n: int = 201) -> list[History]:
    """Histories ``t^k`` on ``[0, 1]`` for ``k = 0..count-1``, with exact derivatives."""
    out = []
    for k in range(count):
        u = lambda t, k=k: np.asarray(t, dtype=float) ** k  # noqa: E731
        du = (lambda t, k=k: k * np.asarray(t, dtype=float) ** (k - 1)) if k else (lambda t: np.zeros_like(t))
        out.append(History.from_function(u, 0.0, 1.0, n, derivatives=(du,)))
    return out


def fit_caputo_stationary(
    target: Func,
    alpha: float,
    history_basis: Sequence[History],
    ridge: float | None = None,
    *,
    window: tuple[float, float] = (1.1, 2.0),
    steps: int = 2000,
    n_fit: int = 200,
    residual_times: Sequence[float] = (1.25, 1.5, 2.0),
) -> FitReport:
    """Fit ``target`` on ``window`` by continuations of the given histories.

    Each history is continued past ``t = 1`` with :func:`stationary_extension`
    up to ``window[1]``; coefficients solve the ridge least-squares problem on
    ``n_fit`` points.  The Caputo residual of the combination is the same
    combination of the per-history residuals at ``residual_times``.
    """
    lo, hi = window
    if lo - 1.0 < 0.05:
        raise ValueError("window must start at least 0.05 past the junction")
    ts = np.linspace(lo, hi, n_fit)
    exts = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        for h in history_basis:
            exts.append(stationary_extension(alpha, h, hi, steps, check=False))
    F = np.stack([e(ts) for e in exts], axis=1)
    c, ridge_used, cond = _ridge_solve(F, target(ts), ridge)
    sup = float(np.max(np.abs(F @ c - target(ts))))
    R = np.array([[spliced_caputo(alpha, h, e, t) for t in residual_times] for h, e in zip(history_basis, exts)])
    resid = float(np.max(np.abs(c @ R)))
    # linearity bound: |sum c_i r_i| <= sum |c_i| |r_i|
    bound = float(np.max(np.abs(c) @ np.abs(R)))
    extras = {"ridge": ridge_used, "per_basis_residual": float(np.max(np.abs(R))), "residual_bound": bound}
    return FitReport(c, sup, (), resid, cond, extras)
