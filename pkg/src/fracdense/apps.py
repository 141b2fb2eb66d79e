"""Worked applications: Abel inversion for the tautochrone, the comb transfer function, and a spring-dashpot ladder."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from ._errors import AccuracyWarning, ConsistencyError
from .caputo import CaputoSpec, caputo_derivative
from .quad import integrate_pieces, integrate_singular_ends

Func = Callable[[np.ndarray], np.ndarray]

G_EARTH = 9.81
PHYS_TOL = 1e-6


# ---------------------------------------------------------------- tautochrone


@dataclass(frozen=True)
class SlideProblem:
    """Gravity ``g``, descent-time law ``T_of_h`` and largest release height ``h_max``."""

    g: float
    T_of_h: Callable[[float], float]
    h_max: float

    def __post_init__(self) -> None:
        if not self.g > 0 or not self.h_max > 0:
            raise ValueError("g and h_max must be positive")
        hs = np.linspace(self.h_max / 64, self.h_max, 64)
        T = np.array([float(self.T_of_h(h)) for h in hs])
        fall = np.sqrt(2.0 * hs / self.g)
        if np.any(T < fall * (1.0 - 1e-12)):
            raise ValueError("descent time is below the free-fall time somewhere")


@dataclass(frozen=True)
class SlideRecovery:
    H: np.ndarray
    Phi: np.ndarray
    phi: np.ndarray
    fprime_sq: np.ndarray


def abel_primitive(sp: SlideProblem, H: float, tol: float = 1e-12) -> float:
    """``Phi(H) = sqrt(2g)/pi * int_0^H T(h) (H-h)^(-1/2) dh`` (arclength up to height ``H``)."""
    T = np.vectorize(lambda h: float(sp.T_of_h(h)), otypes=[float])
    val = integrate_singular_ends(lambda h, dl, dr: T(h) / np.sqrt(dr), 0.0, H, 0.0, -0.5, tol, distances=True)
    return math.sqrt(2.0 * sp.g) / math.pi * val


def tautochrone_recover(sp: SlideProblem, H_grid: Sequence[float], tol: float = 1e-12) -> SlideRecovery:
    """Recover ``phi = sqrt(1 + f'^2)`` and ``f'^2`` on ``H_grid`` from the descent-time law.

    ``phi`` is the derivative of :func:`abel_primitive` by second-order
    differences on the grid (one-sided at the ends).

    Raises
    ------
    ValueError
        If ``phi < 1 - 1e-6`` somewhere, i.e. the slide would have to be
        faster than free fall.
    """
    H = np.asarray(H_grid, dtype=float)
    if H.ndim != 1 or len(H) < 3 or np.any(np.diff(H) <= 0) or H[0] <= 0:
        raise ValueError("H_grid must be increasing, positive, with at least 3 points")
    if H[-1] > sp.h_max:
        raise ValueError("H_grid exceeds h_max")
    Phi = np.array([abel_primitive(sp, h, tol) for h in H])
    phi = np.gradient(Phi, H, edge_order=2)
    if np.any(phi < 1.0 - PHYS_TOL):
        raise ValueError(f"unphysical slide: phi drops to {phi.min():.6g} < 1")
    fsq = phi * phi - 1.0
    if np.any(fsq < -PHYS_TOL):
        warnings.warn("clamping negative |f'|^2 to zero", AccuracyWarning, stacklevel=2)
    return SlideRecovery(H, Phi, phi, np.maximum(fsq, 0.0))


def slide_profile(H: np.ndarray, fprime_sq: np.ndarray) -> Func:
    """``|f'|^2`` as a function of height, from samples.

    The spline is placed on ``y (1 + |f'|^2)``, which stays bounded at the
    bottom of the slide for the usual laws (constant for the cycloid, linear
    for the inclined plane).  The two end samples, which come from one-sided
    differences, are dropped, and the spline is continued linearly outside;
    the result is clamped at zero.
    """
    H = np.asarray(H, dtype=float)
    if len(H) < 6:
        raise ValueError("need at least 6 samples")
    Hi = H[1:-1]
    spl = CubicSpline(Hi, Hi * (1.0 + np.asarray(fprime_sq, dtype=float)[1:-1]))
    d1 = spl.derivative()
    lo, hi = Hi[0], Hi[-1]

    def q(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        yc = np.clip(y, lo, hi)
        return spl(yc) + d1(yc) * (y - yc)

    # |f'|^2 >= 0; rounding in the linear continuation must not make it negative
    return lambda y: np.maximum(q(y) / y - 1.0, 0.0)


def tautochrone_forward(fprime_sq: Func, g: float, h: float, tol: float = 1e-12) -> tuple[float, float]:
    """Descent time from height ``h`` for a slide with slope law ``fprime_sq``.

    Returns ``(direct, caputo_form)``: the integral
    ``int_0^h sqrt(1 + f'^2(y)) / sqrt(2 g (h - y)) dy`` and the same time as
    ``sqrt(pi/(2g))`` times the order-1/2 Caputo derivative of the arclength.
    Both tolerate ``|f'|^2 ~ 1/y`` at the bottom.

    Raises
    ------
    ConsistencyError
        If the two disagree by more than 5e-4 relatively.
    """
    if not g > 0 or not h > 0:
        raise ValueError("g and h must be positive")

    def phi(y: np.ndarray) -> np.ndarray:
        return np.sqrt(np.asarray(fprime_sq(y), dtype=float) + 1.0)

    direct = integrate_singular_ends(
        lambda y, dl, dr: phi(y) / np.sqrt(2.0 * g * dr), 0.0, h, -0.5, -0.5, tol, distances=True
    )
    # Phi' = phi = v(y) y^(-1/2) with v bounded at 0
    v = lambda y: np.sqrt((np.asarray(fprime_sq(y), dtype=float) + 1.0) * y)  # noqa: E731
    d_half = caputo_derivative(CaputoSpec(0.5, 0.0), None, h, uk=v, uk_left_power=-0.5, tol=tol)
    cap = math.sqrt(math.pi / (2.0 * g)) * d_half
    if abs(cap - direct) > 5e-4 * abs(direct):
        raise ConsistencyError(f"direct {direct:.12g} and Caputo {cap:.12g} descent times disagree")
    return float(direct), float(cap)


def cycloid_fprime_sq(T: float, g: float = G_EARTH) -> tuple[Func, float]:
    """The isochronous slide for descent time ``T``: ``((2r - y)/y, r)`` with ``r = g T^2 / pi^2``."""
    r = g * T * T / math.pi**2
    return (lambda y: (2.0 * r - np.asarray(y, dtype=float)) / np.asarray(y, dtype=float)), r


# ---------------------------------------------------------------- comb


@dataclass(frozen=True)
class CombParams:
    s: float
    xi: float
    omega: float

    def __post_init__(self) -> None:
        if not 0.0 < self.s <= 1.0:
            raise ValueError("s must lie in (0, 1]")
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    @property
    def a(self) -> float:
        return math.sqrt(self.omega)

    @property
    def c(self) -> float:
        return abs(self.xi) ** (2.0 * self.s)

    @property
    def b(self) -> float:
        return 1.0 / (2.0 * self.a + self.c)


def _bump_d2(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # exp(1 - 1/q), q = 1 - t^2, and its second derivative
    t = np.asarray(t, dtype=float)
    B = np.zeros_like(t)
    B2 = np.zeros_like(t)
    ins = np.abs(t) < 1.0
    ti = t[ins]
    q = 1.0 - ti * ti
    Bi = np.exp(1.0 - 1.0 / q)
    B[ins] = Bi
    B2[ins] = Bi * (4.0 * ti * ti / q**4 - 2.0 / q**2 - 8.0 * ti * ti / q**3)
    return B, B2


TEST_FUNCTIONS: tuple[tuple[float, float, int], ...] = (
    # centre, half-width, polynomial degree of the modulating factor
    (0.0, 1.0, 0),
    (0.3, 1.5, 0),
    (-0.5, 2.0, 1),
    (0.2, 0.7, 2),
    (1.0, 3.0, 1),
)


def _test_function(centre: float, width: float, deg: int) -> tuple[Func, Func]:
    # phi(y) = y^deg * B((y - centre)/width) with exact second derivative
    def phi(y: np.ndarray) -> np.ndarray:
        B, _ = _bump_d2((y - centre) / width)
        return y**deg * B

    def d2(y: np.ndarray) -> np.ndarray:
        t = (y - centre) / width
        B, B2 = _bump_d2(t)
        ins = np.abs(t) < 1.0
        B1 = np.zeros_like(t)
        q = 1.0 - t[ins] ** 2
        B1[ins] = B[ins] * (-2.0 * t[ins] / q**2)
        out = y**deg * B2 / width**2
        if deg >= 1:
            out = out + 2.0 * deg * y ** (deg - 1) * B1 / width
        if deg >= 2:
            out = out + deg * (deg - 1) * y ** (deg - 2) * B
        return out

    return phi, d2


def weak_residual(
    p: CombParams, centre: float, width: float, deg: int = 0, tol: float = 1e-13, *, decay: float | None = None
) -> float:
    """Relative weak-form residual of ``g'' = a^2 g - b(2a+c) delta + c delta g`` for ``g = b exp(-a|y|)``.

    Tested against ``y^deg`` times a smooth bump; the residual
    ``int g phi'' - a^2 int g phi + b(2a+c) phi(0) - c g(0) phi(0)`` is divided
    by the sum of the absolute values of its four terms.  ``decay`` replaces
    the rate in ``g`` (not in the equation), for checking that a wrong
    candidate is rejected.
    """
    a, b, c = p.a, p.b, p.c
    rate = a if decay is None else float(decay)
    phi, d2 = _test_function(centre, width, deg)
    gfun = lambda y: b * np.exp(-rate * np.abs(y))  # noqa: E731
    lo, hi = centre - width, centre + width
    edges = sorted({lo, hi} | ({0.0} if lo < 0.0 < hi else set()))
    t1 = integrate_pieces(lambda y: gfun(y) * d2(y), edges, tol)
    t2 = a * a * integrate_pieces(lambda y: gfun(y) * phi(y), edges, tol)
    p0 = float(phi(np.array([0.0]))[0])
    t3 = b * (2.0 * a + c) * p0
    t4 = c * b * p0
    res = t1 - t2 + t3 - t4
    scale = abs(t1) + abs(t2) + abs(t3) + abs(t4)
    return abs(res) / scale if scale > 0 else 0.0


def comb_transfer(p: CombParams) -> tuple[float, float, float]:
    """``(W0, pde_residual, density_residual)`` for the comb transfer function.

    ``W0 = 1/(2 sqrt(omega) + |xi|^(2s))`` is the value at ``y = 0`` of
    ``W(y) = W0 exp(-sqrt(omega)|y|)``.  ``pde_residual`` is the largest
    relative weak-form residual over five test functions;
    ``density_residual`` is the relative residual of
    ``(|xi|^(2s) + 2 sqrt(omega)) E_U = 2/sqrt(omega)`` with
    ``E_U = 2/(sqrt(omega)(2 sqrt(omega) + |xi|^(2s)))``.
    """
    W0 = p.b
    pde = max(weak_residual(p, *tf) for tf in TEST_FUNCTIONS)
    E_U = 2.0 / (p.a * (2.0 * p.a + p.c))
    rhs = 2.0 / p.a
    dens = abs((p.c + 2.0 * p.a) * E_U - rhs) / rhs
    return W0, pde, dens


# ---------------------------------------------------------------- ladder


def ladder_closed_form(omega: float) -> float:
    """Positive fixed point of ``X = 1 + 1/(2 omega + 1/X)``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    return 0.5 * (1.0 + math.sqrt(1.0 + 2.0 / omega))


def ladder_cf(omega: float, depth: int) -> tuple[float, float]:
    """Continued fraction truncated after ``depth`` levels (tail value 1) and its limit."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    X = 1.0
    for _ in range(depth):
        X = 1.0 + 1.0 / (2.0 * omega + 1.0 / X)
    return X, ladder_closed_form(omega)


def ladder_small_omega_ratio(omega: float) -> float:
    """``(2X - 1)/sqrt(2/omega)`` with ``X`` the closed form; tends to 1 as ``omega -> 0``."""
    return (2.0 * ladder_closed_form(omega) - 1.0) / math.sqrt(2.0 / omega)
