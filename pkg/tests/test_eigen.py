from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import jn_zeros

from fracdense.ball import GreenKernel
from fracdense.eigen import boundary_exponent_fit, eigen_residual, power_iterate, spherical_mean


@pytest.fixture(scope="module")
def half():
    return power_iterate(GreenKernel(1, 0.5))


def test_classical_interval():
    res = power_iterate(GreenKernel(1, 1.0))
    assert res.lambda1 == pytest.approx(math.pi**2 / 4, rel=1e-8)


def test_classical_disc():
    res = power_iterate(GreenKernel(2, 1.0), n_nodes=32)
    assert res.lambda1 == pytest.approx(jn_zeros(0, 1)[0] ** 2, rel=1e-5)


def test_half_laplacian_value(half):
    # reference value for the half Laplacian on (-1, 1)
    assert half.lambda1 == pytest.approx(1.1577738836977, rel=1e-7)


def test_eigenfunction_properties(half):
    phi = half.phi
    assert np.all(phi.values >= 0)
    w = phi.meta["weights"]
    assert float(w @ phi.values**2) == pytest.approx(1.0, abs=1e-12)
    assert abs(half.boundary_slope - 0.5) < 0.05
    assert eigen_residual(half) < 1e-3


def test_rayleigh_sequence_monotone(half):
    r = half.rayleigh
    assert np.all(np.diff(r) <= 1e-12 * r[0])


@pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
def test_eigenvalue_scaling_with_radius(s):
    a = power_iterate(GreenKernel(1, s), n_nodes=128)
    b = power_iterate(GreenKernel(1, s), n_nodes=128, radius=2.0)
    assert b.lambda1 == pytest.approx(a.lambda1 * 2.0 ** (-2 * s), rel=1e-10)


def test_eigenvalue_increases_with_s():
    lams = [power_iterate(GreenKernel(1, s), n_nodes=128).lambda1 for s in (0.25, 0.5, 0.75)]
    assert lams[0] < lams[1] < lams[2]


def test_radial_eigenfunction_spherical_mean():
    res = power_iterate(GreenKernel(2, 0.5), n_nodes=24)
    x = np.array([0.3, 0.4])
    assert spherical_mean(res.phi, x) == pytest.approx(float(res.phi(x[None, :])[0]), rel=1e-12)


def test_spherical_mean_of_quadratic():
    assert spherical_mean(lambda p: p[..., 0] ** 2, np.array([1.0, 0.0])) == pytest.approx(0.5, abs=1e-14)
    assert spherical_mean(lambda x: x**3, 0.4) == pytest.approx(0.0, abs=1e-15)


def test_boundary_exponent_fit_exact_power():
    slope, intercept, r2 = boundary_exponent_fit(lambda x: 3.0 * (1 - np.asarray(x)) ** 0.7)
    assert slope == pytest.approx(0.7, abs=1e-12)
    assert math.exp(intercept) == pytest.approx(3.0, rel=1e-10)
    assert r2 == pytest.approx(1.0)


def test_power_iterate_validation():
    with pytest.raises(ValueError):
        power_iterate(GreenKernel(1, 0.5), n_nodes=10)
