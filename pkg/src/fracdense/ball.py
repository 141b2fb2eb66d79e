"""Green and Poisson representations for (-Delta)^s on the unit ball.

Green kernel::

    G(x, y) = k(n,s) |x-y|^(2s-n) I(r0),   I(r) = int_0^r eta^(s-1) (1+eta)^(-n/2) deta,
    r0 = (1-|x|^2)(1-|y|^2) / |x-y|^2,     k(n,s) = Gamma(n/2) / (pi^(n/2) 4^s Gamma(s)^2).

Poisson kernel for ``s = m + sigma``::

    P(x, y) = (-1)^m gamma(n,sigma) (1-|x|^2)^s (|y|^2-1)^(-s) |x-y|^(-n).

One-dimensional problems live on ``(-1, 1)``; two-dimensional ones take radial
data.  Points in two dimensions are arrays of shape ``(..., 2)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import hyp2f1

from .quad import gauss_legendre, integrate_adaptive, integrate_power_singularity, integrate_singular_ends
from .sampled import SampledFunction
from .specialfn import gamma

Func = Callable[[np.ndarray], np.ndarray]

_R_SWITCH = 1e4
_N_ASYMP = 8


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in ``R^n`` (2 for ``n = 1``)."""
    return 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)


@dataclass(frozen=True)
class GreenKernel:
    n: int
    s: float

    def __post_init__(self) -> None:
        if self.n not in (1, 2):
            raise ValueError(f"only n = 1 or 2 is supported, got {self.n}")
        if not self.s > 0:
            raise ValueError("s must be positive")

    @property
    def k_ns(self) -> float:
        n, s = self.n, self.s
        return gamma(n / 2.0) / (math.pi ** (n / 2.0) * 4.0**s * gamma(s) ** 2)


def _eta_integral_series(r: np.ndarray, n: int, s: float) -> np.ndarray:
    return r**s / s * hyp2f1(n / 2.0, s, s + 1.0, -r)


@functools.lru_cache(maxsize=None)
def _large_r_constant(n: int, s: float) -> float:
    # matches the 1/eta expansion to the exact value at the switch radius
    r = np.array([_R_SWITCH])
    return float(_eta_integral_series(r, n, s)[0] - _eta_asymptotic_terms(r, n, s)[0])


def _eta_asymptotic_terms(r: np.ndarray, n: int, s: float) -> np.ndarray:
    # int^r eta^(s-1-n/2) (1 + 1/eta)^(-n/2), expanded in 1/eta
    out = np.zeros_like(r)
    logr = np.log(r)
    c = 1.0
    for j in range(_N_ASYMP):
        if j:
            c *= (-n / 2.0 - j + 1.0) / j  # binomial(-n/2, j)
        e = s - n / 2.0 - j
        if abs(e) < 1e-14:
            out += c * logr
        else:
            out += c * np.exp(e * logr) / e
    return out


def eta_integral(r, n: int, s: float) -> np.ndarray:
    """``I(r) = int_0^r eta^(s-1)(1+eta)^(-n/2) d eta`` for ``r >= 0``.

    A Gauss hypergeometric closed form below ``r = 1e4`` and the expansion
    in ``1/eta`` above, so arguments far beyond double-precision-safe
    hypergeometric evaluation (near-coincident points) stay accurate.
    """
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = r <= _R_SWITCH
    out[small] = _eta_integral_series(r[small], n, s)
    big = ~small
    if np.any(big):
        out[big] = _large_r_constant(n, s) + _eta_asymptotic_terms(r[big], n, s)
    return out


def eta_integral_quad(r: float, n: int, s: float, tol: float = 1e-12) -> float:
    """Reference route for :func:`eta_integral` by singular quadrature."""
    if r == 0:
        return 0.0
    f = lambda e: (1.0 + e) ** (-n / 2.0)  # noqa: E731
    if r <= 1.0:
        return integrate_power_singularity(f, 0.0, r, s - 1.0, True, tol, rtol=1e-13)
    head = integrate_power_singularity(f, 0.0, 1.0, s - 1.0, True, tol, rtol=1e-13)
    # eta = 1/t maps [1, r] to [1/r, 1] with integrand t^(n/2-s-1) (1+t)^(-n/2)
    g = lambda t: t ** (n / 2.0 - s - 1.0) * (1.0 + t) ** (-n / 2.0)  # noqa: E731
    lo = 1.0 / r
    gam = n / 2.0 - s - 1.0
    if gam > -1.0:
        tail = integrate_power_singularity(
            lambda t: (1.0 + t) ** (-n / 2.0), 0.0, 1.0, gam, True, tol, rtol=1e-13
        ) - integrate_power_singularity(lambda t: (1.0 + t) ** (-n / 2.0), 0.0, lo, gam, True, tol, rtol=1e-13)
    else:
        # logarithmic or growing: integrate in log t
        tail, _ = integrate_adaptive(lambda w: g(np.exp(w)) * np.exp(w), math.log(lo), 0.0, tol, rtol=1e-13)
    return head + tail


def _norm2(x: np.ndarray, n: int) -> np.ndarray:
    return x * x if n == 1 else np.sum(x * x, axis=-1)


def green_from_parts(g: GreenKernel, dist: np.ndarray, one_minus_x2: np.ndarray, one_minus_y2: np.ndarray) -> np.ndarray:
    """Kernel value from ``|x-y|``, ``1-|x|^2`` and ``1-|y|^2`` supplied separately."""
    n, s = g.n, g.s
    dist = np.asarray(dist, dtype=float)
    num = np.maximum(one_minus_x2, 0.0) * np.maximum(one_minus_y2, 0.0)
    r0 = num / (dist * dist)
    return g.k_ns * dist ** (2.0 * s - n) * eta_integral(r0, n, s)


def green_kernel(g: GreenKernel, x, y, *, method: str = "closed") -> np.ndarray | float:
    """``G_s(x, y)`` for ``x != y`` in the unit ball.

    ``method="quad"`` evaluates the eta-integral by singular quadrature
    (scalar inputs only) as an independent check of the closed form.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = _norm2(x, g.n)
    ny = _norm2(y, g.n)
    if np.any(nx >= 1.0) or np.any(ny >= 1.0):
        raise ValueError("points must lie in the open unit ball")
    dist = np.abs(x - y) if g.n == 1 else np.linalg.norm(x - y, axis=-1)
    if np.any(dist == 0):
        raise ValueError("green_kernel is singular at x = y")
    if method == "quad":
        if np.ndim(dist) != 0:
            raise ValueError("method='quad' takes scalar points")
        r0 = float((1 - nx) * (1 - ny) / dist**2)
        return g.k_ns * float(dist) ** (2 * g.s - g.n) * eta_integral_quad(r0, g.n, g.s)
    out = green_from_parts(g, dist, 1.0 - nx, 1.0 - ny)
    return float(out) if out.ndim == 0 else out


def torsion_constant(n: int, s: float) -> float:
    """``kappa`` in the Green solution ``kappa (1-|x|^2)^s`` of ``(-Delta)^s u = 1``."""
    return gamma(n / 2.0) / (4.0**s * gamma(1.0 + s) * gamma(n / 2.0 + s))


def torsion_function(n: int, s: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return torsion_constant(n, s) * np.maximum(1.0 - _norm2(x, n), 0.0) ** s


def _near_exponent(g: GreenKernel) -> float:
    e = 2.0 * g.s - g.n
    # near x = y the kernel is a * d^e + b (+ log d when e = 0); a quadratic
    # substitution covers e = 0 and e > 0, a power one the singular case
    if e < 0.0:
        return e
    return 0.0 if e == math.floor(e) and e > 0 else -0.5


def solve_dirichlet(g: GreenKernel, f: Func, x, tol: float = 1e-10, n_angles: int = 64) -> float:
    """``u(x) = int_B G_s(x, y) f(y) dy``.

    In one dimension the integral is split at ``x``; each piece carries the
    kernel singularity at one end and the ``(1-|y|^2)^s`` boundary factor at
    the other, both removed by substitution.  In two dimensions ``f`` is
    radial (called with ``|y|``) and polar coordinates centred at ``x`` are
    used, with a trapezoid rule over ``n_angles`` directions.
    """
    x = np.asarray(x, dtype=float)
    s = g.s
    if g.n == 1:
        x = float(x)
        if not -1.0 < x < 1.0:
            raise ValueError("x must lie in (-1, 1)")
        omx = (1.0 - x) * (1.0 + x)
        ge = _near_exponent(g)

        def left(_, d, rest):  # y = x - d, rest = 1 + y
            return green_from_parts(g, d, omx, rest * (2.0 - rest)) * f(x - d)

        def right(_, d, rest):  # y = x + d, rest = 1 - y
            return green_from_parts(g, d, omx, rest * (2.0 - rest)) * f(x + d)

        total = integrate_singular_ends(left, 0.0, 1.0 + x, ge, s, tol, distances=True)
        total += integrate_singular_ends(right, 0.0, 1.0 - x, ge, s, tol, distances=True)
        return total

    if x.shape != (2,):
        raise ValueError("x must have shape (2,) in two dimensions")
    nx = float(x @ x)
    if nx >= 1.0:
        raise ValueError("x must lie in the open unit ball")
    ge = _near_exponent(g) + 1.0
    total = 0.0
    for phi in 2.0 * math.pi * np.arange(n_angles) / n_angles:
        e = np.array([math.cos(phi), math.sin(phi)])
        xe = float(x @ e)
        root = math.sqrt(xe * xe + 1.0 - nx)
        rp, rm = -xe + root, -xe - root

        def radial(rho, d, rest, e=e, rp=rp, rm=rm):
            y = x[None, :] + np.multiply.outer(rho, e)
            one_y2 = rest * (rho - rm)
            return green_from_parts(g, d, 1.0 - nx, one_y2) * f(np.linalg.norm(y, axis=-1)) * d

        total += integrate_singular_ends(radial, 0.0, rp, ge, s, tol, distances=True)
    return total * 2.0 * math.pi / n_angles


def green_solution(g: GreenKernel, f: Func, n_nodes: int = 48, tol: float = 1e-11) -> SampledFunction:
    """Green solution on ``(-1, 1)`` as ``(1-x^2)^s v(x)`` with ``v`` a Chebyshev interpolant.

    ``u`` is computed by :func:`solve_dirichlet` at Chebyshev points; dividing
    by the boundary factor leaves a smooth ``v`` for smooth ``f``.  The
    result evaluates anywhere on the line (zero outside the ball).
    """
    if g.n != 1:
        raise ValueError("green_solution is one-dimensional")
    nodes = np.cos(math.pi * (np.arange(n_nodes) + 0.5) / n_nodes)[::-1]
    vals = np.array([solve_dirichlet(g, f, x, tol) for x in nodes])
    v = np.polynomial.chebyshev.Chebyshev.fit(nodes, vals / (1.0 - nodes**2) ** g.s, n_nodes - 1, domain=[-1, 1])

    def u(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1.0
        out = np.zeros_like(x)
        xi = x[inside]
        out[inside] = (1.0 - xi * xi) ** g.s * v(xi)
        return out

    return SampledFunction(nodes, vals, interpolant=u, meta={"smooth_factor": v})


@functools.lru_cache(maxsize=None)
def poisson_normalization(n: int, sigma: float) -> float:
    """``gamma(n, sigma)`` fixed so that the ``m = 0`` kernel has unit mass at ``x = 0``.

    The mass is ``|S^(n-1)| int_1^inf (r^2-1)^(-sigma) r^(-1) dr``, computed by
    quadrature: a power substitution on ``[1, 2]`` and ``r = 1/t`` beyond.
    """
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    near = integrate_power_singularity(
        lambda r: (r + 1.0) ** (-sigma) / r, 1.0, 2.0, -sigma, True, 1e-13, rtol=1e-14
    )
    far = integrate_power_singularity(
        lambda t: (1.0 - t * t) ** (-sigma), 0.0, 0.5, 2.0 * sigma - 1.0, True, 1e-13, rtol=1e-14
    )
    return 1.0 / (sphere_area(n) * (near + far))


@dataclass(frozen=True)
class PoissonKernel:
    n: int
    s: float

    def __post_init__(self) -> None:
        if self.n not in (1, 2):
            raise ValueError(f"only n = 1 or 2 is supported, got {self.n}")
        if not self.s > 0 or self.s == math.floor(self.s):
            raise ValueError(f"s must be positive and non-integer, got {self.s}")

    @property
    def m(self) -> int:
        return int(math.floor(self.s))

    @property
    def sigma(self) -> float:
        return self.s - self.m

    @property
    def gamma_nsigma(self) -> float:
        return poisson_normalization(self.n, self.sigma)


def poisson_kernel(p: PoissonKernel, x, y) -> np.ndarray | float:
    """``(-1)^m gamma (1-|x|^2)^s (|y|^2-1)^(-s) |x-y|^(-n)`` for ``|x| < 1 < |y|``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = _norm2(x, p.n)
    ny = _norm2(y, p.n)
    if np.any(nx >= 1.0):
        raise ValueError("x must lie in the open unit ball")
    if np.any(ny <= 1.0):
        raise ValueError("y must lie outside the closed unit ball")
    dist = np.abs(x - y) if p.n == 1 else np.linalg.norm(x - y, axis=-1)
    val = (-1.0) ** p.m * p.gamma_nsigma * (1.0 - nx) ** p.s * (ny - 1.0) ** (-p.s) * dist ** (-float(p.n))
    return float(val) if np.ndim(val) == 0 else val


def harmonic_extension(
    p: PoissonKernel,
    g_ext: Func,
    x,
    support: tuple[float, float] = (2.0, 3.0),
    tol: float = 1e-11,
    n_angles: int = 128,
) -> float:
    """``int_{r_in < |y| < r_out} P(x, y) g_ext(y) dy`` for ``x`` in the ball.

    In two dimensions the annulus is integrated adaptively in ``|y|`` with a
    trapezoid rule over ``n_angles`` directions.
    """
    r_in, r_out = support
    if not 1.0 < r_in < r_out:
        raise ValueError("support must satisfy 1 < r_in < r_out")
    x = np.asarray(x, dtype=float)
    if p.n == 1:
        f = lambda y: poisson_kernel(p, float(x), y) * g_ext(y)  # noqa: E731
        return integrate_adaptive(f, r_in, r_out, tol)[0] + integrate_adaptive(f, -r_out, -r_in, tol)[0]
    th = 2.0 * math.pi * np.arange(n_angles) / n_angles
    ring = np.stack([np.cos(th), np.sin(th)], axis=-1)

    def radial(r: np.ndarray) -> np.ndarray:
        y = np.multiply.outer(r, ring)
        vals = poisson_kernel(p, x, y) * g_ext(y)
        return r * vals.mean(axis=-1) * 2.0 * math.pi

    return integrate_adaptive(radial, r_in, r_out, tol)[0]


@dataclass(frozen=True)
class ExtensionRule:
    """Fixed Gauss rule on the exterior support, for fast repeated extensions (n = 1).

    ``matrix(x)`` returns the kernel-times-weights matrix so that the
    extension of data sampled at ``nodes`` is ``matrix(x) @ data``.
    """

    p: PoissonKernel
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def on_intervals(cls, p: PoissonKernel, intervals, order: int = 48) -> "ExtensionRule":
        if p.n != 1:
            raise ValueError("ExtensionRule is one-dimensional")
        rule = gauss_legendre(order)
        xs, ws = [], []
        for lo, hi in intervals:
            xi, wi = rule.mapped(lo, hi)
            xs.append(xi)
            ws.append(wi)
        return cls(p, np.concatenate(xs), np.concatenate(ws))

    def matrix(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return poisson_kernel(self.p, x[:, None], self.nodes[None, :]) * self.weights[None, :]

    def apply(self, g_ext: Func, x) -> np.ndarray:
        return self.matrix(x) @ g_ext(self.nodes)


@dataclass(frozen=True)
class BoundaryPoint:
    e: np.ndarray
    omega: np.ndarray
    eps: float = 0.0

    def __post_init__(self) -> None:
        e = np.atleast_1d(np.asarray(self.e, dtype=float))
        w = np.atleast_1d(np.asarray(self.omega, dtype=float))
        if abs(np.linalg.norm(e) - 1) > 1e-12 or abs(np.linalg.norm(w) - 1) > 1e-12:
            raise ValueError("e and omega must be unit vectors")
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "omega", w)

    @property
    def admissible(self) -> bool:
        return float(self.e @ self.omega) < 0

    def point(self, eps: float) -> np.ndarray:
        return self.e + eps * self.omega


def boundary_limit_density(
    g: GreenKernel, f: Func, b: BoundaryPoint, tol: float = 1e-10, strict: bool = False, n_angles: int = 64
) -> float:
    """``lim eps^(-s) u(e + eps omega)`` for ``u`` the Green solution with datum ``f``.

    Equals ``k(n,s) (-2 e.omega)^s int_B f(z) (1-|z|^2)^s / (s |z-e|^n) dz``.
    Non-admissible directions (``e.omega >= 0``) give 0, or raise when ``strict``.
    In two dimensions the integral uses polar coordinates centred at ``e``
    with a Gauss-Legendre rule over the ``n_angles`` inward directions.
    """
    s = g.s
    if not b.admissible:
        if strict:
            raise ValueError("direction does not enter the ball: e.omega >= 0")
        return 0.0
    pref = g.k_ns * (-2.0 * float(b.e @ b.omega)) ** s
    if g.n == 1:
        e = float(b.e[0])
        # z = e - sign(e) d, |z - e| = d, 1 - z^2 = d (2 - d)
        integrand = lambda _, rest, d: f(e * (1.0 - d)) * (rest * d) ** s / (s * d)  # noqa: E731
        # here rest = 2 - d and d is the distance to e
        val = integrate_singular_ends(integrand, 0.0, 2.0, s, s - 1.0, tol, distances=True)
        return pref * val
    e = b.e
    perp = np.array([-e[1], e[0]])
    rule = gauss_legendre(n_angles)
    phis, wphi = rule.mapped(-0.5 * math.pi, 0.5 * math.pi)
    total = 0.0
    for phi, w in zip(phis, wphi):
        d = -math.cos(phi) * e + math.sin(phi) * perp
        rmax = 2.0 * math.cos(phi)

        def radial(_, rho, rest, d=d):
            z = e[None, :] + np.multiply.outer(rho, d)
            return f(np.linalg.norm(z, axis=-1)) * rho ** (s - 1.0) * rest**s / s

        total += w * integrate_singular_ends(radial, 0.0, rmax, s - 1.0, s, tol, distances=True)
    return pref * total


def direct_boundary_limit(
    g: GreenKernel, f: Func, b: BoundaryPoint, eps=(0.04, 0.02, 0.01, 0.005, 0.0025), degree: int = 2
) -> tuple[float, np.ndarray]:
    """Extrapolate ``eps^(-s) u(e + eps omega)`` to ``eps = 0`` by a polynomial fit in ``eps``."""
    eps = np.asarray(eps, dtype=float)
    vals = np.array([solve_dirichlet(g, f, b.point(ep) if g.n == 2 else float(b.point(ep)[0])) for ep in eps])
    q = vals * eps ** (-g.s)
    coef = np.polyfit(eps, q, degree)
    return float(coef[-1]), q
