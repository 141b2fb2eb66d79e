from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdense._errors import AccuracyWarning
from fracdense.caputo import (
    CaputoSpec,
    History,
    caputo_derivative,
    caputo_via_marchaud,
    increment_exponent,
    ml_eigen_check,
    ml_eigenfunction,
    spliced_caputo,
    stationary_extension,
)


def power_caputo(alpha: float, p: float, t: float) -> float:
    # D^alpha t^p = Gamma(p+1)/Gamma(p+1-alpha) t^(p-alpha)
    return math.gamma(p + 1) / math.gamma(p + 1 - alpha) * t ** (p - alpha)


def test_spec_validation():
    with pytest.raises(ValueError):
        CaputoSpec(0.0)
    with pytest.raises(ValueError):
        CaputoSpec(0.5, math.inf)
    assert CaputoSpec(0.5).k == 1
    assert CaputoSpec(1.5).k == 2
    assert CaputoSpec(2.0).k == 2 and CaputoSpec(2.0).is_integer


@given(
    st.floats(min_value=0.05, max_value=0.95),
    st.integers(min_value=1, max_value=4),
    st.floats(min_value=0.2, max_value=3.0),
)
def test_power_rule(alpha, p, t):
    u_prime = lambda x: p * x ** (p - 1)  # noqa: E731
    val = caputo_derivative(CaputoSpec(alpha), None, t, uk=u_prime)
    assert val == pytest.approx(power_caputo(alpha, p, t), rel=1e-9)


@pytest.mark.parametrize("alpha", [1.3, 1.7])
def test_power_rule_second_order(alpha):
    u2 = lambda x: 12.0 * x**2  # noqa: E731  (u = x^4)
    assert caputo_derivative(CaputoSpec(alpha), None, 1.4, uk=u2) == pytest.approx(power_caputo(alpha, 4, 1.4), rel=1e-10)


def test_constant_is_annihilated():
    assert caputo_derivative(CaputoSpec(0.4), None, 2.0, uk=lambda x: np.zeros_like(x)) == 0.0


def test_integer_order_is_classical():
    val = caputo_derivative(CaputoSpec(1.0), None, 0.7, uk=np.cos)
    assert val == pytest.approx(math.cos(0.7), rel=1e-15)


def test_shifted_initial_point():
    # D^alpha_a (t-a)^2 at t
    a, t, alpha = -1.0, 0.5, 0.6
    val = caputo_derivative(CaputoSpec(alpha, a), None, t, uk=lambda x: 2 * (x - a))
    assert val == pytest.approx(power_caputo(alpha, 2, t - a), rel=1e-10)


def test_requires_t_after_a():
    with pytest.raises(ValueError):
        caputo_derivative(CaputoSpec(0.5, 1.0), None, 1.0, uk=np.cos)


def test_history_derivative_from_spline():
    h = History.from_function(np.sin, 0.0, 2.0, 401)
    np.testing.assert_allclose(h.derivative(1)(np.array([0.5, 1.0])), np.cos([0.5, 1.0]), atol=1e-8)


def test_history_validation():
    with pytest.raises(ValueError):
        History(np.array([0.0, 1.0, 0.5, 2.0]), np.zeros(4))
    with pytest.raises(ValueError):
        History(np.linspace(0, 1, 3), np.zeros(3))


@pytest.mark.parametrize("alpha,lam", [(0.5, 1.0), (0.5, 2.0), (1.5, 1.0), (1.5, 2.0), (0.3, 1.5)])
def test_ml_eigen_relation(alpha, lam):
    assert ml_eigen_check(alpha, lam, 0.0, np.linspace(0.1, 2.0, 7)) < 1e-10


def test_ml_eigenfunction_shift():
    u, _ = ml_eigenfunction(0.5, 1.0, a=2.0)
    assert float(u(np.array([2.0]))[0]) == 1.0
    assert ml_eigen_check(0.5, 1.0, 2.0, [2.5, 3.0]) < 1e-10


def test_marchaud_exponential():
    # D^alpha from -inf of e^t is e^t
    with warnings.catch_warnings():
        warnings.simplefilter("error", AccuracyWarning)
        val = caputo_via_marchaud(0.5, np.exp, 0.3)
    assert val == pytest.approx(math.exp(0.3), rel=1e-8)


def test_marchaud_sine_phase_shift():
    # D^alpha from -inf of sin t is sin(t + alpha pi/2)
    with pytest.warns(AccuracyWarning):
        val = caputo_via_marchaud(0.5, np.sin, 0.0)
    assert val == pytest.approx(math.sin(math.pi / 4), abs=1e-5)


def test_minus_inf_spec_dispatches_to_marchaud():
    val = caputo_derivative(CaputoSpec(0.5, -math.inf), np.exp, 0.0)
    assert val == pytest.approx(1.0, rel=1e-8)


@pytest.fixture(scope="module")
def linear_history_extension():
    h = History.from_function(lambda t: t, 0.0, 1.0, 201, derivatives=(np.ones_like,))
    return h, stationary_extension(0.5, h, 2.0, 4000)


def test_stationary_extension_is_caputo_stationary(linear_history_extension):
    h, ext = linear_history_extension
    for t in (1.2, 1.5, 2.0):
        assert abs(spliced_caputo(0.5, h, ext, t)) < 1e-4
    assert ext.meta["error_estimate"] < 1e-2
    assert ext.meta["residual"] < 1e-12


def test_stationary_extension_increment_exponent(linear_history_extension):
    _, ext = linear_history_extension
    assert abs(increment_exponent(ext) - 0.5) < 0.1


def test_stationary_extension_constant_history():
    h = History.from_function(lambda t: 3.0 + 0 * t, 0.0, 1.0, 51, derivatives=(np.zeros_like,))
    ext = stationary_extension(0.5, h, 2.0, 400)
    assert np.ptp(ext.values) < 1e-12
    assert float(ext(np.array([1.7]))[0]) == pytest.approx(3.0, abs=1e-12)


def test_stationary_extension_validation():
    h = History.from_function(lambda t: t, 0.0, 1.0, 21)
    with pytest.raises(ValueError):
        stationary_extension(1.5, h, 2.0)
    with pytest.raises(ValueError):
        stationary_extension(0.5, h, 0.5)


def test_extension_is_linear_in_history():
    h1 = History.from_function(lambda t: t, 0.0, 1.0, 101, derivatives=(np.ones_like,))
    h2 = History.from_function(lambda t: t * t, 0.0, 1.0, 101, derivatives=(lambda t: 2 * t,))
    h12 = History.from_function(lambda t: t + t * t, 0.0, 1.0, 101, derivatives=(lambda t: 1 + 2 * t,))
    e1, e2, e12 = (stationary_extension(0.5, h, 1.5, 500, check=False) for h in (h1, h2, h12))
    np.testing.assert_allclose(e12.values, e1.values + e2.values, atol=1e-10)
