"""Caputo derivatives, Mittag-Leffler eigenfunctions and Caputo-stationary continuation.

For ``k - 1 < alpha < k`` the Caputo derivative with initial point ``a`` is

    D^alpha u(t) = 1/Gamma(k - alpha) * int_a^t u^(k)(tau) (t - tau)^(k - alpha - 1) dtau,

and for integer ``alpha`` it is the classical derivative ``u^(alpha)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, make_interp_spline

from ._errors import AccuracyWarning
from .quad import integrate_adaptive, integrate_power_singularity, integrate_singular_ends
from .sampled import SampledFunction
from .specialfn import MLParams, gamma, mittag_leffler_array

Func = Callable[[np.ndarray], np.ndarray]

MINUS_INF = -math.inf
TAIL_WARN = 1e-6


@dataclass(frozen=True)
class CaputoSpec:
    """Order ``alpha`` and initial point ``a`` (``-inf`` selects the Marchaud form).

    ``k`` is the number of classical derivatives taken: ``ceil(alpha)``, so an
    integer order reduces to the ordinary derivative of that order.
    """

    alpha: float
    a: float = 0.0

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if math.isnan(self.a) or self.a == math.inf:
            raise ValueError(f"initial point must be finite or -inf, got {self.a}")

    @property
    def k(self) -> int:
        return int(math.ceil(self.alpha))

    @property
    def is_integer(self) -> bool:
        return float(self.alpha) == float(self.k)


@dataclass(frozen=True)
class History:
    """Samples of ``u`` on ``[grid[0], grid[-1]]`` used as a past for continuation.

    ``derivatives`` may hold exact derivative callables ``(u', u'', ...)``;
    otherwise derivatives come from an interpolating spline of degree
    ``smoothness_order + 2`` (at least cubic).
    """

    grid: np.ndarray
    values: np.ndarray
    smoothness_order: int = 1
    derivatives: tuple[Func, ...] = ()

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or len(grid) < 4:
            raise ValueError("history needs matching 1-d grid and values with at least 4 samples")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("history grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls, u: Func, a: float, t0: float, n: int = 201, derivatives: tuple[Func, ...] = ()
    ) -> "History":
        grid = np.linspace(a, t0, n)
        return cls(grid, u(grid), smoothness_order=max(1, len(derivatives)), derivatives=derivatives)

    @property
    def a(self) -> float:
        return float(self.grid[0])

    @property
    def t0(self) -> float:
        return float(self.grid[-1])

    def derivative(self, k: int = 1) -> Func:
        if 1 <= k <= len(self.derivatives):
            return self.derivatives[k - 1]
        if k > self.smoothness_order:
            raise ValueError(f"history provides {self.smoothness_order} derivatives, {k} requested")
        degree = min(max(3, self.smoothness_order + 2), len(self.grid) - 1)
        return make_interp_spline(self.grid, self.values, k=degree).derivative(k)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        degree = min(max(3, self.smoothness_order + 2), len(self.grid) - 1)
        return make_interp_spline(self.grid, self.values, k=degree)(t)


def _kth_derivative(u, k: int, uk: Func | None) -> Func:
    if uk is not None:
        return uk
    if hasattr(u, "derivative"):
        return u.derivative(k)
    raise TypeError("pass uk= (the k-th derivative) or a u with a .derivative(k) method")


def caputo_derivative(
    spec: CaputoSpec,
    u,
    t: float,
    *,
    uk: Func | None = None,
    uk_left_power: float = 0.0,
    tol: float = 1e-11,
    tail_cut: float = 1e4,
) -> float:
    """Caputo derivative of ``u`` at ``t``.

    Parameters
    ----------
    spec : CaputoSpec
    u : callable or History or SampledFunction
        The function; only its ``k``-th derivative is used unless ``spec.a``
        is ``-inf``, in which case the Marchaud form is applied to ``u``.
    t : float
        Evaluation time, ``t > a``.
    uk : callable, optional
        The ``k``-th derivative.  When ``uk_left_power`` is nonzero, ``uk``
        is the smooth factor ``v`` in ``u^(k)(tau) = v(tau) (tau-a)**p``.
    uk_left_power : float
        Exponent ``p > -1`` of a known algebraic singularity of ``u^(k)`` at ``a``.
    """
    t = float(t)
    if spec.a == MINUS_INF:
        if spec.k != 1 or spec.is_integer:
            raise ValueError("the -inf initial point is supported for 0 < alpha < 1 only")
        return caputo_via_marchaud(spec.alpha, u, t, tail_cut)
    a = float(spec.a)
    if not t > a:
        raise ValueError(f"need t > a, got t={t}, a={a}")
    k = spec.k
    f = _kth_derivative(u, k, uk)
    if spec.is_integer:
        val = np.asarray(f(np.array([t])), dtype=float)[0]
        return float(val * (t - a) ** uk_left_power)
    gam = k - spec.alpha - 1.0
    scale = 1.0 / gamma(k - spec.alpha)
    if uk_left_power == 0.0:
        return scale * integrate_power_singularity(f, a, t, gam, at_left=False, tol=tol)
    integrand = lambda x, dl, dr: f(x) * dl**uk_left_power * dr**gam  # noqa: E731
    return scale * integrate_singular_ends(integrand, a, t, uk_left_power, gam, tol, distances=True)


def caputo_via_marchaud(
    alpha: float,
    u: Func,
    t: float,
    tail_cut: float = 1e4,
    tol: float = 1e-10,
) -> float:
    """Caputo derivative from ``-inf`` in Marchaud form.

    Evaluates ``alpha/Gamma(1-alpha) * int_0^inf (u(t) - u(t-tau)) tau^(-1-alpha) dtau``.
    The piece on ``(0, 1]`` is integrated after factoring out ``tau^(-alpha)``,
    the piece on ``[1, tail_cut]`` adaptively.  Beyond ``tail_cut`` ``u`` is
    replaced by its mean ``L`` over ``[t - tail_cut, t - tail_cut/2]`` and the
    tail ``(u(t) - L) tail_cut^(-alpha) / alpha`` is added in closed form; the
    spread of ``u`` about ``L`` there bounds the neglected remainder, and an
    :class:`AccuracyWarning` is issued when that bound exceeds 1e-6.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"Marchaud form needs 0 < alpha < 1, got {alpha}")
    if not tail_cut > 1.0:
        raise ValueError("tail_cut must exceed 1")
    t = float(t)
    ut = float(np.asarray(u(np.array([t])))[0])

    def near(tau: np.ndarray) -> np.ndarray:
        return (ut - u(t - tau)) / tau

    def far(tau: np.ndarray) -> np.ndarray:
        return (ut - u(t - tau)) * tau ** (-1.0 - alpha)

    inner = integrate_power_singularity(near, 0.0, 1.0, -alpha, True, tol)
    # breakpoints every unit keep oscillatory integrands well resolved
    n_pts = int(min(tail_cut, 20000))
    outer, _ = integrate_adaptive(far, 1.0, tail_cut, tol, points=np.linspace(1.0, tail_cut, n_pts)[1:-1])

    probe = np.linspace(t - tail_cut, t - 0.5 * tail_cut, 4001)
    up = u(probe)
    level = float(np.mean(up))
    tail = (ut - level) * tail_cut ** (-alpha) / alpha
    coef = alpha / gamma(1.0 - alpha)
    bound = coef * float(np.max(np.abs(up - level))) * tail_cut ** (-alpha) / alpha
    if bound > TAIL_WARN:
        warnings.warn(
            f"Marchaud tail bound {bound:.2e} exceeds {TAIL_WARN:g} at tail_cut={tail_cut:g}",
            AccuracyWarning,
            stacklevel=2,
        )
    return coef * (inner + outer + tail)


def ml_eigenfunction(alpha: float, lam: float, a: float = 0.0) -> tuple[Func, Func]:
    """``u(t) = E_{alpha,1}(lam (t-a)^alpha)`` and the smooth factor of ``u^(k)``.

    With ``k = ceil(alpha)``, ``u^(k)(t) = lam (t-a)^(alpha-k) E_{alpha,alpha+1-k}(lam (t-a)^alpha)``;
    the second callable returns everything except ``(t-a)^(alpha-k)``.
    """
    k = int(math.ceil(alpha))
    p0 = MLParams(alpha, 1.0)
    pk = MLParams(alpha, alpha + 1.0 - k)

    def u(t: np.ndarray) -> np.ndarray:
        return mittag_leffler_array(p0, lam * np.maximum(np.asarray(t, dtype=float) - a, 0.0) ** alpha)

    def uk_smooth(t: np.ndarray) -> np.ndarray:
        return lam * mittag_leffler_array(pk, lam * np.maximum(np.asarray(t, dtype=float) - a, 0.0) ** alpha)

    return u, uk_smooth


def ml_eigen_check(alpha: float, lam: float, a: float, t_grid) -> float:
    """Largest relative residual ``|D^alpha u - lam u| / |lam u|`` over ``t_grid``.

    ``u`` is the Mittag-Leffler eigenfunction; its Caputo derivative is
    computed by quadrature, not by the series identity.
    """
    spec = CaputoSpec(alpha, a)
    k = spec.k
    u, uk_smooth = ml_eigenfunction(alpha, lam, a)
    worst = 0.0
    for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
        if not t > a:
            raise ValueError(f"grid point {t} does not exceed a={a}")
        d = caputo_derivative(spec, u, t, uk=uk_smooth, uk_left_power=alpha - k)
        lu = lam * float(u(np.array([t]))[0])
        worst = max(worst, abs(d - lu) / abs(lu))
    return worst


def _kernel_weights(alpha: float, h: float, n: int) -> np.ndarray:
    # int over one step of (t_n - tau)^(-alpha), for step offsets 0..n-1
    j = np.arange(n + 1, dtype=float)
    cum = j ** (1.0 - alpha)
    return h ** (1.0 - alpha) * np.diff(cum) / (1.0 - alpha)


def _history_term(alpha: float, dpsi: Func, a: float, t0: float, t: np.ndarray, tol: float) -> np.ndarray:
    # int_a^t0 psi'(tau)(t - tau)^(-alpha) dtau, with u = (t - tau)^(1-alpha)
    # the integrand becomes p * psi'(t - u^p), smooth for t > t0
    p = 1.0 / (1.0 - alpha)
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        lo = (ti - t0) ** (1.0 - alpha)
        hi = (ti - a) ** (1.0 - alpha)
        g = lambda w, ti=ti: p * dpsi(ti - w**p)  # noqa: E731
        out[i], _ = integrate_adaptive(g, lo, hi, tol)
    return out


@dataclass(frozen=True)
class Extension:
    """Piecewise-constant-slope continuation on ``t0 + h*(1..N)``.

    Evaluation uses a cubic spline in ``sigma = (t - t0)^alpha``, the variable
    in which the continuation is smooth near the junction.
    """

    alpha: float
    t0: float
    psi0: float
    times: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    residual: float

    @property
    def _spline(self) -> CubicSpline:
        sig = np.concatenate([[0.0], (self.times - self.t0) ** self.alpha])
        return CubicSpline(sig, np.concatenate([[self.psi0], self.values]))

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self._spline(np.maximum(t - self.t0, 0.0) ** self.alpha)

    def dpsi_dsigma(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self._spline.derivative(1)(np.maximum(t - self.t0, 0.0) ** self.alpha)


def _march(alpha: float, history: History, T: float, steps: int, tol: float) -> Extension:
    a, t0 = history.a, history.t0
    h = (T - t0) / steps
    times = t0 + h * np.arange(1, steps + 1)
    dpsi = history.derivative(1)
    H = _history_term(alpha, dpsi, a, t0, times, tol)
    w = _kernel_weights(alpha, h, steps)
    v = np.empty(steps)
    resid = 0.0
    for n in range(steps):
        # sum_{m<n} v_m w_{n-m}, with w reversed to align offsets
        conv = float(np.dot(v[:n], w[n:0:-1])) if n else 0.0
        v[n] = -(H[n] + conv) / w[0]
        resid = max(resid, abs(H[n] + conv + v[n] * w[0]))
    psi0 = float(history.values[-1])
    values = psi0 + h * np.cumsum(v)
    return Extension(alpha, t0, psi0, times, values, v, resid)


def stationary_extension(
    alpha: float,
    history: History,
    T: float,
    steps: int = 4000,
    *,
    tol: float = 1e-12,
    check: bool = True,
) -> SampledFunction:
    """Continue ``history`` past its last time so that the Caputo derivative vanishes.

    Solves ``0 = int_a^t psi'(tau)(t - tau)^(-alpha) dtau`` for ``t`` in
    ``(t0, T]`` with ``psi'`` piecewise constant on ``steps`` uniform cells;
    the kernel is integrated exactly on each cell so the discrete equation is
    solved exactly step by step.

    The returned :class:`SampledFunction` lives on the march grid and
    evaluates through :class:`Extension`; ``meta`` carries the extension
    object, the largest discrete residual and an error estimate obtained by
    comparing with a half-resolution march.  An :class:`AccuracyWarning` is
    issued when that estimate exceeds 1e-2.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"stationary extension needs 0 < alpha < 1, got {alpha}")
    if not T > history.t0:
        raise ValueError("T must exceed the last history time")
    if steps < 2:
        raise ValueError("need at least two steps")
    ext = _march(alpha, history, T, steps, tol)
    err_est = float("nan")
    if check:
        coarse = _march(alpha, history, T, steps // 2, tol)
        err_est = float(np.max(np.abs(coarse.values - ext.values[1::2][: len(coarse.values)])))
        if err_est > 1e-2:
            warnings.warn(
                f"stationary extension step-doubling estimate {err_est:.2e} exceeds 1e-2; increase steps",
                AccuracyWarning,
                stacklevel=2,
            )
    return SampledFunction(
        ext.times,
        ext.values,
        interpolant=ext,
        meta={"extension": ext, "residual": ext.residual, "error_estimate": err_est, "history": history},
    )


def spliced_caputo(alpha: float, history: History, extension: SampledFunction, t: float, tol: float = 1e-10) -> float:
    """Caputo derivative of history-then-extension at a time past the junction.

    The history part uses the history derivative; the extension part uses
    the spline in ``sigma`` so that ``psi'(tau) = (dpsi/dsigma) alpha (tau-t0)^(alpha-1)``
    and the two endpoint powers are absorbed by substitution.
    """
    ext: Extension = extension.meta["extension"]
    a, t0 = history.a, history.t0
    if not t > t0:
        raise ValueError("t must lie past the junction")
    spec = CaputoSpec(alpha, a)
    dpsi = history.derivative(1)
    head = _history_term(alpha, dpsi, a, t0, np.array([t]), tol)[0]
    body = lambda x, dl, dr: ext.dpsi_dsigma(x) * alpha * dl ** (alpha - 1.0) * dr ** (-alpha)  # noqa: E731
    tail = integrate_singular_ends(body, t0, t, alpha - 1.0, -alpha, tol, distances=True)
    return (head + tail) / gamma(spec.k - alpha)


def increment_exponent(extension: SampledFunction, eps_window: tuple[float, float] = (1e-3, 1e-1)) -> float:
    """Log-log slope of ``|psi(t0 + eps) - psi(t0)|`` against ``eps`` on the march grid."""
    ext: Extension = extension.meta["extension"]
    eps = ext.times - ext.t0
    sel = (eps >= eps_window[0]) & (eps <= eps_window[1])
    if np.count_nonzero(sel) < 5:
        raise ValueError("too few grid points in the exponent window")
    inc = np.abs(ext.values[sel] - ext.psi0)
    slope, _ = np.polyfit(np.log(eps[sel]), np.log(inc), 1)
    return float(slope)
