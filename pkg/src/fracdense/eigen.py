"""First Dirichlet eigenpair of (-Delta)^s on a ball by power iteration on the Green operator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._errors import ConvergenceError
from .ball import GreenKernel, green_from_parts, solve_dirichlet, torsion_constant, torsion_function
from .quad import gauss_legendre, integrate_adaptive
from .sampled import SampledFunction

Func = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EigenResult:
    lambda1: float
    phi: SampledFunction
    iterations: int
    boundary_slope: float
    rayleigh: np.ndarray = field(repr=False)
    n: int = 1
    s: float = 0.5
    radius: float = 1.0


def _nystrom_1d(g: GreenKernel, n_nodes: int, radius: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rule = gauss_legendre(n_nodes)
    x = np.asarray(rule.nodes)
    w = np.asarray(rule.weights)
    d = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(d, 1.0)
    om = 1.0 - x * x
    K = green_from_parts(g, d, om[:, None], om[None, :])
    np.fill_diagonal(K, 0.0)
    A = K * w[None, :]
    # singularity subtraction: int G(x_i, y) phi(y) dy
    #   = sum_j w_j G_ij (phi_j - phi_i) + phi_i T(x_i)
    T = torsion_function(1, g.s, x)
    A[np.diag_indices_from(A)] = T - A.sum(axis=1)
    # domain of radius R: G_R(x, y) = R^(2s-n) G(x/R, y/R), dy = R dy'
    return radius * x, radius * w, A * radius ** (2.0 * g.s)


def _angular_kernel(g: GreenKernel, r: float, rp: float, tol: float) -> float:
    # int_0^{2pi} G(r e_1, rp e_theta) dtheta, symmetric in theta
    om_r = 1.0 - r * r
    om_p = 1.0 - rp * rp

    def f(th: np.ndarray) -> np.ndarray:
        # |x - y|^2 = (r - rp)^2 + 4 r rp sin^2(th/2), kept free of cancellation
        dist = np.sqrt((r - rp) ** 2 + 4.0 * r * rp * np.sin(0.5 * th) ** 2)
        return green_from_parts(g, dist, om_r, om_p)

    scale = abs(r - rp) / max(r, rp)
    pts = [p for p in (scale, 4 * scale, 16 * scale) if 0 < p < math.pi]
    return 2.0 * integrate_adaptive(f, 0.0, math.pi, tol, points=pts)[0]


def _nystrom_radial(g: GreenKernel, n_nodes: int, radius: float, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rule = gauss_legendre(n_nodes)
    r = 0.5 * (np.asarray(rule.nodes) + 1.0)
    wr = 0.5 * np.asarray(rule.weights) * r
    K = np.zeros((n_nodes, n_nodes))
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            K[i, j] = K[j, i] = _angular_kernel(g, r[i], r[j], tol)
    A = K * wr[None, :]
    T = torsion_constant(2, g.s) * (1.0 - r * r) ** g.s
    A[np.diag_indices_from(A)] = T - A.sum(axis=1)
    # the L2(B) weights carry the 2 pi of the angular measure
    return radius * r, 2.0 * math.pi * radius**2 * wr, A * radius ** (2.0 * g.s)


def _smooth_fit(x: np.ndarray, phi: np.ndarray, s: float, radius: float, degree: int) -> Func:
    # phi = (1 - (x/R)^2)^s * P(x/R) with P a Legendre least-squares fit
    t = x / radius
    P = np.polynomial.legendre.Legendre.fit(t, phi / (1.0 - t * t) ** s, degree, domain=[-1, 1])

    def f(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        ty = y / radius
        out = np.zeros_like(ty)
        inside = np.abs(ty) < 1.0
        out[inside] = (1.0 - ty[inside] ** 2) ** s * P(ty[inside])
        return out

    return f


def power_iterate(
    g: GreenKernel,
    n_nodes: int = 256,
    tol: float = 1e-13,
    max_iter: int = 1000,
    *,
    radius: float = 1.0,
    fit_degree: int | None = None,
    slope_window: tuple[float, float] = (1e-3, 1e-1),
    angular_tol: float = 1e-10,
) -> EigenResult:
    """Power iteration ``phi <- normalise(G phi)`` from the constant function.

    The Green operator is discretised by Nystrom's method on Gauss-Legendre
    nodes with singularity subtraction (the diagonal carries the exactly
    known integral of the kernel, so the weakly singular diagonal entries
    are never evaluated).  In two dimensions the unknown is radial, so every
    iterate already equals its spherical mean.

    Iteration stops when successive Rayleigh quotients differ by less than
    ``tol`` relatively.  ``phi`` is returned with unit ``L^2`` norm; it
    evaluates anywhere through the fixed point ``phi = lambda1 G phi`` (1-d)
    or through a weighted polynomial fit (radial 2-d).
    """
    if g.n == 1 and n_nodes < 64:
        raise ValueError("need at least 64 nodes")
    if g.n == 2 and n_nodes < 16:
        raise ValueError("need at least 16 radial nodes")
    if g.n == 1:
        x, w, A = _nystrom_1d(g, n_nodes, radius)
    else:
        x, w, A = _nystrom_radial(g, n_nodes, radius, angular_tol)

    v = np.ones_like(x)
    v /= math.sqrt(float(w @ (v * v)))
    history: list[float] = []
    for it in range(1, max_iter + 1):
        y = A @ v
        mu = float(w @ (v * y))
        history.append(1.0 / mu)
        v = y / math.sqrt(float(w @ (y * y)))
        if it > 1 and abs(history[-1] - history[-2]) <= tol * abs(history[-1]):
            break
    else:
        raise ConvergenceError(f"power iteration did not settle in {max_iter} steps")
    lam = history[-1]
    if v.sum() < 0:
        v = -v

    deg = fit_degree if fit_degree is not None else min(60, n_nodes // 3)
    if g.n == 1:
        smooth = _smooth_fit(x, v, g.s, radius, deg)
        unit = GreenKernel(1, g.s)

        def evaluate(t: np.ndarray) -> np.ndarray:
            t = np.atleast_1d(np.asarray(t, dtype=float))
            out = np.zeros_like(t)
            for i, ti in enumerate(t):
                if abs(ti) < radius:
                    # fixed point on the unit ball, rescaled
                    sm = lambda y: smooth(radius * y)  # noqa: E731
                    out[i] = lam * radius ** (2 * g.s) * solve_dirichlet(unit, sm, ti / radius)
            return out

        phi = SampledFunction(x, v, interpolant=evaluate, meta={"smooth": smooth, "weights": w})
    else:
        xs = np.concatenate([-x[::-1], x])
        vs = np.concatenate([v[::-1], v])
        smooth = _smooth_fit(xs, vs, g.s, radius, deg)
        phi = SampledFunction(
            x, v, interpolant=lambda r: smooth(np.abs(r)), radial=True, meta={"smooth": smooth, "weights": w, "dim": 2}
        )

    slope, _, _ = boundary_exponent_fit(phi, slope_window, radius=radius)
    return EigenResult(lam, phi, len(history), slope, np.array(history), g.n, g.s, radius)


def spherical_mean(u: Func, x, n_angles: int = 64) -> float:
    """Average of ``u`` over the rotations of ``x`` (reflection pair in one dimension)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape == (1,):
        xv = float(np.ravel(x)[0])
        return float(np.mean(u(np.array([xv, -xv]))))
    if x.shape != (2,):
        raise ValueError("x must be a scalar or a point in the plane")
    th = 2.0 * math.pi * np.arange(n_angles) / n_angles
    c, s = np.cos(th), np.sin(th)
    pts = np.stack([c * x[0] - s * x[1], s * x[0] + c * x[1]], axis=-1)
    return float(np.mean(u(pts)))


def boundary_exponent_fit(
    phi: Func, window: tuple[float, float] = (1e-3, 1e-1), n_samples: int = 24, *, radius: float = 1.0
) -> tuple[float, float, float]:
    """Least-squares line through ``(log delta, log phi(R - delta))``.

    Returns ``(slope, intercept, r2)``; the slope estimates the boundary
    exponent and ``exp(intercept)`` the boundary constant.
    """
    if n_samples < 5:
        raise ValueError("need at least 5 samples")
    lo, hi = window
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    delta = np.geomspace(lo, hi, n_samples)
    vals = np.asarray(phi(radius - delta), dtype=float)
    if np.any(vals <= 0):
        raise ValueError("phi must be positive on the fit window")
    X = np.log(delta)
    Y = np.log(vals)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), r2


def eigen_residual(res: EigenResult, points=(-0.6, -0.3, 0.0, 0.3, 0.6)) -> float:
    """``max |(-Delta)^s phi - lambda1 phi| / max |phi|`` over interior points (one dimension).

    The operator is applied to the weighted polynomial fit of ``phi``, which
    is cheap to evaluate and vanishes outside the ball.
    """
    if res.n != 1:
        raise ValueError("eigen_residual is one-dimensional")
    from .fraclap import HypersingularSpec, frac_laplacian

    smooth = res.phi.meta["smooth"]
    spec = HypersingularSpec(1, res.s)
    R = res.radius
    pts = np.asarray(points, dtype=float) * R
    scale = float(np.max(np.abs(smooth(np.linspace(-R, R, 401)))))
    worst = 0.0
    for x in pts:
        lap = frac_laplacian(spec, smooth, float(x), support=R, breakpoints=(-R, R))
        worst = max(worst, abs(lap - res.lambda1 * float(smooth(np.array([x]))[0])))
    return worst / scale
