"""Real-argument Gamma and Mittag-Leffler functions.

Both are evaluated for positive real input only.  The Mittag-Leffler function
is summed from its power series, so it is accurate near the origin and its
supported domain is capped (see :data:`Z_MAX_DEFAULT`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._errors import ConvergenceError

# Lanczos approximation in rational form, g ~ 6.0247, 13 terms; the
# sqrt(2*pi) factor is folded into the numerator coefficients.
_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_G_MINUS_HALF = 5.524680040776729583740234375
_LANCZOS_NUM = (
    23531376880.410759688572007674451636754734846804940,
    42919803642.649098768957899047001988850926355848959,
    35711959237.355668049440185451547166705960488635843,
    17921034426.037209699919755754458931112671403265390,
    6039542586.3520280050642916443072979210699388420708,
    1439720407.3117216736632230727949123939715485786772,
    248874557.86205415651146038641322942321632125127801,
    31426415.585400194380614231628318205362874684987640,
    2876370.6289353724412254090516208496135991145378768,
    186056.26539522349504029498971604569928220784236328,
    8071.6720023658162106380029022722506138218516325024,
    210.82427775157934587250973392071336271166969580291,
    2.5066282746310002701649081771338373386264310793408,
)
_LANCZOS_DEN = (
    0.0, 39916800.0, 120543840.0, 150917976.0, 105258076.0, 45995730.0,
    13339535.0, 2637558.0, 357423.0, 32670.0, 1925.0, 66.0, 1.0,
)
_GAMMA_XMAX = 171.6243769563027

#: Largest |z| accepted by :func:`mittag_leffler` for alpha >= 0.3.
Z_MAX_DEFAULT = 50.0
#: Largest |z| accepted when alpha < 0.3.
Z_MAX_SMALL_ALPHA = 10.0
ML_TERM_CAP = 100_000


def _lanczos_sum(x: float) -> float:
    num = 0.0
    den = 0.0
    if x < 5.0:
        for a, b in zip(reversed(_LANCZOS_NUM), reversed(_LANCZOS_DEN)):
            num = num * x + a
            den = den * x + b
    else:
        # reversed Horner in 1/x avoids overflow for large x
        for a, b in zip(_LANCZOS_NUM, _LANCZOS_DEN):
            num = num / x + a
            den = den / x + b
    return num / den


def _shift_correction(x: float, y: float) -> float:
    # relative correction for the rounding error in y = x + g - 1/2
    if x > _LANCZOS_G_MINUS_HALF:
        q = y - x
        z = q - _LANCZOS_G_MINUS_HALF
    else:
        q = y - _LANCZOS_G_MINUS_HALF
        z = q - x
    return z * _LANCZOS_G / y


def gamma(x: float) -> float:
    """Euler's Gamma function for ``x > 0``.

    Raises
    ------
    ValueError
        If ``x <= 0``.
    OverflowError
        If ``Gamma(x)`` is not representable as a double.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"gamma requires x > 0, got {x!r}")
    if x > _GAMMA_XMAX:
        raise OverflowError(f"gamma({x}) overflows double precision")
    if x == math.floor(x) and x <= 23:
        return float(math.factorial(int(x) - 1))
    y = x + _LANCZOS_G_MINUS_HALF
    r = _lanczos_sum(x) / math.exp(y)
    r += _shift_correction(x, y) * r
    # split the power so that neither factor overflows
    sqrtpow = y ** (x / 2.0 - 0.25)
    return r * sqrtpow * sqrtpow


def gammaln(x: float) -> float:
    """Natural logarithm of ``gamma(x)`` for ``x > 0`` (no overflow limit)."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"gammaln requires x > 0, got {x!r}")
    if x == math.floor(x) and x <= 23:
        return math.log(math.factorial(int(x) - 1))
    if x < 1e-5:
        return -math.log(x) + math.log1p(x * (-0.5772156649015329))
    y = x + _LANCZOS_G_MINUS_HALF
    r = math.log(_lanczos_sum(x)) - _LANCZOS_G
    return r + (x - 0.5) * (math.log(y) - 1.0) + _shift_correction(x, y)


def rgamma(x: float) -> float:
    """Reciprocal Gamma, ``1/Gamma(x)``, extended by zero at the poles.

    Defined for every real ``x``; used where series coefficients hit the
    non-positive integers.
    """
    x = float(x)
    if x > 0.0:
        if x > _GAMMA_XMAX:
            return math.exp(-gammaln(x))
        return 1.0 / gamma(x)
    if x == math.floor(x):
        return 0.0
    # reflection keeps everything on the positive side
    return math.sin(math.pi * x) * gamma(1.0 - x) / math.pi


@dataclass(frozen=True)
class MLParams:
    """Parameters of the two-parameter Mittag-Leffler function."""

    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"need alpha > 0 and beta > 0, got {self}")

    @property
    def z_max(self) -> float:
        return Z_MAX_DEFAULT if self.alpha >= 0.3 else Z_MAX_SMALL_ALPHA


def mittag_leffler(p: MLParams, z: float) -> float:
    r"""Evaluate :math:`E_{\alpha,\beta}(z) = \sum_j z^j / \Gamma(\alpha j + \beta)`.

    The series is summed with Kahan compensation and stops once a term past
    the peak of the term sequence drops below ``1e-16`` of the partial sum.

    Parameters
    ----------
    p : MLParams
        Series exponent step ``alpha`` and offset ``beta``.
    z : float
        Real argument with ``|z| <= p.z_max``.

    Raises
    ------
    ValueError
        If ``|z|`` lies outside the supported domain.
    ConvergenceError
        If the term cap is reached first.
    """
    z = float(z)
    if abs(z) > p.z_max:
        raise ValueError(f"|z|={abs(z)} exceeds the supported domain {p.z_max} for alpha={p.alpha}")
    if z == 0.0:
        return 1.0 / gamma(p.beta)

    logz = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    total = 0.0
    comp = 0.0
    prev_log = -math.inf
    for j in range(ML_TERM_CAP):
        log_term = j * logz - gammaln(p.alpha * j + p.beta)
        term = (sign**j) * math.exp(log_term) if j else rgamma(p.beta)
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        decreasing = log_term < prev_log
        prev_log = log_term
        if j > 0 and decreasing and abs(term) <= 1e-16 * abs(total):
            return total
    raise ConvergenceError(f"Mittag-Leffler series did not converge in {ML_TERM_CAP} terms (z={z}, {p})")


def mittag_leffler_array(p: MLParams, z: np.ndarray) -> np.ndarray:
    """Vectorised :func:`mittag_leffler` over an array.

    The same series and stopping rule, run over all entries at once; an entry
    stops accumulating once its own rule has fired.
    """
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > p.z_max):
        raise ValueError(f"|z| exceeds the supported domain {p.z_max} for alpha={p.alpha}")
    flat = z.reshape(-1)
    total = np.zeros_like(flat)
    comp = np.zeros_like(flat)
    active = np.ones(flat.shape, dtype=bool)
    nonzero = flat != 0.0
    with np.errstate(divide="ignore"):
        logz = np.where(nonzero, np.log(np.abs(np.where(nonzero, flat, 1.0))), -np.inf)
    sign = np.where(flat < 0, -1.0, 1.0)
    prev_log = np.full_like(flat, -np.inf)
    for j in range(ML_TERM_CAP):
        lg = gammaln(p.alpha * j + p.beta)
        log_term = j * logz - lg if j > 0 else np.full_like(flat, -lg)
        if j == 0:
            term = np.where(active, rgamma(p.beta), 0.0)
        else:
            term = np.where(active, sign**j * np.exp(log_term), 0.0)
        y = term - comp
        s = total + y
        comp = np.where(active, (s - total) - y, comp)
        total = np.where(active, s, total)
        done = (j > 0) & (log_term < prev_log) & (np.abs(term) <= 1e-16 * np.abs(total))
        done |= ~nonzero
        active &= ~done
        prev_log = log_term
        if not np.any(active):
            return total.reshape(z.shape)
    raise ConvergenceError(f"Mittag-Leffler series did not converge in {ML_TERM_CAP} terms ({p})")
