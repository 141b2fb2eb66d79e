from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdense._errors import ConvergenceError
from fracdense.specialfn import (
    Z_MAX_DEFAULT,
    MLParams,
    gamma,
    gammaln,
    mittag_leffler,
    mittag_leffler_array,
    rgamma,
)

mp.mp.dps = 40


def ml_reference(alpha: float, beta: float, z: float) -> float:
    # high-precision power series
    total = mp.mpf(0)
    zz = mp.mpf(z)
    for j in range(2000):
        term = zz**j / mp.gamma(mp.mpf(alpha) * j + beta)
        total += term
        if j > 10 and abs(term) < mp.mpf(10) ** -35 * max(1, abs(total)):
            break
    return float(total)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.5, 2.5, 3.7, 10.2, 50.5, 120.3, 170.9])
def test_gamma_against_mpmath(x):
    assert gamma(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)


@pytest.mark.parametrize("n", range(1, 20))
def test_gamma_integers_are_factorials(n):
    assert gamma(n) == math.factorial(n - 1)
    assert gammaln(n) == pytest.approx(math.log(math.factorial(n - 1)), abs=1e-15)


@given(st.floats(min_value=1e-3, max_value=160.0))
def test_gamma_recurrence(x):
    assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-12)


@given(st.floats(min_value=1e-6, max_value=1e4))
def test_gammaln_against_mpmath(x):
    ref = float(mp.loggamma(x))
    assert gammaln(x) == pytest.approx(ref, rel=1e-13, abs=1e-14)


def test_gamma_half():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5])
def test_gamma_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        gamma(bad)


def test_gamma_overflow():
    with pytest.raises(OverflowError):
        gamma(172.0)


@pytest.mark.parametrize("x", [-0.5, -1.5, -2.25, 0.3, 4.0])
def test_rgamma_reflection(x):
    assert rgamma(x) == pytest.approx(float(1 / mp.gamma(x)), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_rgamma_zero_at_poles(x):
    assert rgamma(x) == 0.0


@pytest.mark.parametrize(
    "alpha,beta,z",
    [(0.5, 1.0, 1.0), (0.5, 1.0, 3.0), (1.5, 1.0, 2.0), (0.8, 0.8, -2.0), (2.0, 1.0, 9.0), (0.3, 1.2, 4.0)],
)
def test_mittag_leffler_against_series(alpha, beta, z):
    assert mittag_leffler(MLParams(alpha, beta), z) == pytest.approx(ml_reference(alpha, beta, z), rel=1e-12)


def test_ml_known_closed_forms():
    # E_{1/2,1}(z) = exp(z^2) erfc(-z)
    for z in (0.3, 1.0, 2.0):
        ref = float(mp.exp(z * z) * mp.erfc(-z))
        assert mittag_leffler(MLParams(0.5, 1.0), z) == pytest.approx(ref, rel=1e-12)
    # E_{1,2}(z) = (e^z - 1)/z
    assert mittag_leffler(MLParams(1.0, 2.0), 1.5) == pytest.approx(math.expm1(1.5) / 1.5, rel=1e-14)


def test_ml_at_zero():
    assert mittag_leffler(MLParams(0.7, 1.0), 0.0) == 1.0
    assert mittag_leffler(MLParams(0.7, 2.0), 0.0) == 1.0
    assert mittag_leffler_array(MLParams(0.5, 1.0), np.zeros(3)).tolist() == [1.0, 1.0, 1.0]


@given(st.floats(min_value=-5.0, max_value=5.0))
def test_ml_reduces_to_exp(x):
    assert mittag_leffler(MLParams(1.0, 1.0), x) == pytest.approx(math.exp(x), rel=1e-10)


def test_ml_array_matches_scalar():
    p = MLParams(0.6, 1.1)
    z = np.linspace(-4, 8, 37)
    vec = mittag_leffler_array(p, z)
    ref = np.array([mittag_leffler(p, v) for v in z])
    np.testing.assert_allclose(vec, ref, rtol=1e-11, atol=1e-14)


def test_ml_domain_guard():
    with pytest.raises(ValueError):
        mittag_leffler(MLParams(0.5, 1.0), Z_MAX_DEFAULT + 1)
    with pytest.raises(ValueError):
        mittag_leffler_array(MLParams(0.2, 1.0), np.array([11.0]))


def test_ml_params_validation():
    with pytest.raises(ValueError):
        MLParams(0.0, 1.0)
    with pytest.raises(ValueError):
        MLParams(0.5, -1.0)


def test_error_types_exist():
    assert issubclass(ConvergenceError, RuntimeError)
