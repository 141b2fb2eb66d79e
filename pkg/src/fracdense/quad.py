"""Gauss-Legendre rules and adaptive quadrature with endpoint power singularities.

Integrands are called with 1-d numpy arrays of abscissae and must return an
array of the same shape.  Scalar-only callables can be wrapped with
:func:`vectorized`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from ._errors import QuadratureError

Integrand = Callable[[np.ndarray], np.ndarray]

MAX_DEPTH = 40
_PANEL_NODES = 15


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on a reference interval (default ``[-1, 1]``)."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights differ in length")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights affinely transported to ``[a, b]``."""
        lo, hi = self.interval
        scale = (b - a) / (hi - lo)
        return a + (self.nodes - lo) * scale, self.weights * scale

    def integrate(self, f: Integrand, a: float | None = None, b: float | None = None) -> float:
        lo, hi = self.interval
        x, w = self.mapped(lo if a is None else a, hi if b is None else b)
        return float(np.dot(w, f(x)))


@functools.lru_cache(maxsize=64)
def gauss_legendre(n: int) -> QuadratureRule:
    """``n``-point Gauss-Legendre rule on ``[-1, 1]``, exact to degree ``2n-1``."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(nodes=x, weights=w, order=2 * n - 1)


def vectorized(f: Callable[[float], float]) -> Integrand:
    """Lift a scalar function to one accepting and returning arrays."""

    def g(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([f(float(xi)) for xi in x.ravel()], dtype=float).reshape(x.shape)

    return g


def _panel_sums(f: Integrand, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # 15-point Gauss on each panel and on its two halves, one batched call
    rule = gauss_legendre(_PANEL_NODES)
    t, w = rule.nodes, rule.weights
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    quarter = 0.5 * half
    xs = np.concatenate(
        [
            (mid[:, None] + half[:, None] * t).ravel(),
            ((a + quarter)[:, None] + quarter[:, None] * t).ravel(),
            ((mid + quarter)[:, None] + quarter[:, None] * t).ravel(),
        ]
    )
    fx = np.asarray(f(xs), dtype=float).reshape(3, len(a), _PANEL_NODES)
    whole = half * (fx[0] @ w)
    halves = quarter * (fx[1] @ w + fx[2] @ w)
    return whole, halves


def integrate_adaptive(
    f: Integrand,
    a: float,
    b: float,
    tol: float = 1e-10,
    *,
    rtol: float = 0.0,
    points: Iterable[float] = (),
    max_depth: int = MAX_DEPTH,
) -> tuple[float, float]:
    """Adaptive bisection quadrature of ``f`` over ``[a, b]``.

    Each panel is integrated with a 15-point Gauss rule and again on its two
    halves; the difference is the panel error estimate.  While the summed
    estimate exceeds ``max(tol, rtol*|I|)``, every panel above the mean
    allowance is bisected, the new panels being evaluated in one vectorised
    call per sweep.

    Parameters
    ----------
    f : callable
        Integrand accepting an array of abscissae.
    a, b : float
        Finite limits with ``a < b``.
    tol, rtol : float
        Absolute and relative targets for the total error.
    points : iterable of float
        Interior breakpoints where ``f`` is known to be non-smooth.

    Returns
    -------
    value, err_est : float

    Raises
    ------
    QuadratureError
        If the target is missed with every offending panel already bisected
        ``max_depth`` times; the best
        estimate is attached to the exception.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        if a == b:
            return 0.0, 0.0
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("limits must be finite")

    edges = np.unique(np.clip(np.concatenate([[a, b], np.asarray(list(points), dtype=float)]), a, b))
    lo = edges[:-1]
    hi = edges[1:]
    whole, val = _panel_sums(f, lo, hi)
    err = np.abs(whole - val)
    depth = np.zeros(len(lo), dtype=int)
    while True:
        if not np.all(np.isfinite(val)):
            raise QuadratureError("integrand returned non-finite values", float("nan"), float("inf"))
        estimate = float(np.sum(val))
        total_err = float(np.sum(err))
        budget = max(tol, rtol * abs(estimate), 50.0 * np.finfo(float).eps * abs(estimate))
        if total_err <= budget:
            return estimate, total_err
        # refine every panel above the mean allowance, and always the worst one
        pick = err > budget / len(err)
        pick[np.argmax(err)] = True
        pick &= depth < max_depth
        if not np.any(pick):
            raise QuadratureError(
                f"adaptive quadrature exhausted depth {max_depth} on [{a}, {b}]", estimate, total_err
            )
        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        new_depth = np.concatenate([depth[pick], depth[pick]]) + 1
        whole, halves = _panel_sums(f, new_lo, new_hi)
        keep = ~pick
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        depth = np.concatenate([depth[keep], new_depth])
        err = np.concatenate([err[keep], np.abs(whole - halves)])
        val = np.concatenate([val[keep], halves])


def integrate_power_singularity(
    f_smooth: Integrand,
    a: float,
    b: float,
    gamma: float,
    at_left: bool = True,
    tol: float = 1e-10,
    *,
    rtol: float = 0.0,
) -> float:
    """Integrate ``f_smooth(x) * (x - a)**gamma`` (or ``(b - x)**gamma``) over ``[a, b]``.

    The substitution ``x = a + u**(1/(gamma+1))`` absorbs the power factor so
    the transformed integrand is ``f_smooth`` up to a constant, which is then
    handled by :func:`integrate_adaptive`.
    """
    if not gamma > -1.0:
        raise ValueError(f"power singularity needs gamma > -1, got {gamma}")
    if a == b:
        return 0.0
    p = 1.0 / (gamma + 1.0)
    top = (b - a) ** (gamma + 1.0)
    if at_left:
        g = lambda u: f_smooth(a + u**p)  # noqa: E731
    else:
        g = lambda u: f_smooth(b - u**p)  # noqa: E731
    val, _ = integrate_adaptive(g, 0.0, top, tol / p, rtol=rtol)
    return p * val


def integrate_two_sided(
    f_smooth: Integrand,
    a: float,
    b: float,
    gamma_left: float,
    gamma_right: float,
    tol: float = 1e-10,
    *,
    rtol: float = 0.0,
) -> float:
    """Integrate ``f_smooth(x) (x-a)**gamma_left (b-x)**gamma_right`` over ``[a, b]``.

    Split at the midpoint so each half carries one endpoint singularity.
    """
    m = 0.5 * (a + b)
    left = integrate_power_singularity(
        lambda x: f_smooth(x) * (b - x) ** gamma_right, a, m, gamma_left, True, 0.5 * tol, rtol=rtol
    )
    right = integrate_power_singularity(
        lambda x: f_smooth(x) * (x - a) ** gamma_left, m, b, gamma_right, False, 0.5 * tol, rtol=rtol
    )
    return left + right


def integrate_singular_ends(
    f: Callable[..., np.ndarray],
    a: float,
    b: float,
    gamma_left: float = 0.0,
    gamma_right: float = 0.0,
    tol: float = 1e-10,
    *,
    rtol: float = 0.0,
    distances: bool = False,
) -> float:
    """Integrate ``f`` whose endpoint behaviour is ``(x-a)**gamma_left`` and ``(b-x)**gamma_right``.

    Unlike :func:`integrate_two_sided` the power factors are not supplied
    separately: ``f`` is the full integrand and the exponents only select the
    substitution on each half.  An exponent of 0 leaves that half untouched.

    With ``distances=True`` the integrand is called as ``f(x, x - a, b - x)``
    where the distance to the nearer endpoint is computed without
    cancellation, so ``f`` may divide by it even when ``x`` rounds onto the
    endpoint.
    """
    for g in (gamma_left, gamma_right):
        if not g > -1.0:
            raise ValueError(f"power singularity needs gamma > -1, got {g}")
    if a == b:
        return 0.0
    m = 0.5 * (a + b)
    total = 0.0
    for gam, left in ((gamma_left, True), (gamma_right, False)):
        p = 1.0 / (gam + 1.0)
        length = (m - a) if left else (b - m)

        def g(u: np.ndarray, p: float = p, left: bool = left) -> np.ndarray:
            d = u**p
            x = a + d if left else b - d
            jac = p * u ** (p - 1.0) if p != 1.0 else 1.0
            if not distances:
                return f(x) * jac
            if left:
                return f(x, d, (b - a) - d) * jac
            return f(x, (b - a) - d, d) * jac

        total += integrate_adaptive(g, 0.0, length ** (gam + 1.0), 0.5 * tol, rtol=rtol)[0]
    return total


def integrate_pieces(
    f: Integrand,
    edges: Sequence[float],
    tol: float = 1e-10,
    *,
    rtol: float = 0.0,
) -> float:
    """Sum of :func:`integrate_adaptive` over consecutive ``edges``."""
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            total += integrate_adaptive(f, lo, hi, tol / max(1, len(edges) - 1), rtol=rtol)[0]
    return total
