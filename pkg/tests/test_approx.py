from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdense._errors import AccuracyWarning
from fracdense.approx import (
    ExteriorBasis,
    blowup_sequence,
    build_bump,
    fit_caputo_stationary,
    fit_sharmonic,
    harnack_demo,
    harnack_gap,
    polynomial_histories,
    sharmonic_function,
    sharmonicity_residual,
    smooth_bump,
)
from fracdense.ball import PoissonKernel, harmonic_extension
from fracdense.eigen import boundary_exponent_fit
from fracdense.fraclap import HypersingularSpec, frac_laplacian

X = np.linspace(-0.5, 0.5, 61)


@pytest.fixture(scope="module")
def psi():
    return build_bump(PoissonKernel(1, 0.5))


@pytest.fixture(scope="module")
def basis40():
    return ExteriorBasis.two_sided(0.5, 40)


@pytest.fixture(scope="module")
def basis80():
    return ExteriorBasis.two_sided(0.5, 80)


def test_smooth_bump():
    assert smooth_bump(np.array([0.0]))[0] == 1.0
    assert np.all(smooth_bump(np.array([-1.0, 1.0, 2.0])) == 0.0)


def test_zero_profile_gives_zero_bump():
    z = build_bump(PoissonKernel(1, 0.5), profile=lambda r: np.zeros_like(r))
    assert np.all(z(np.linspace(-3, 3, 31)) == 0.0)


def test_bump_matches_adaptive_extension(psi):
    p = PoissonKernel(1, 0.5)
    for x in (0.0, 0.6):
        assert float(psi(np.array([x]))[0]) == pytest.approx(harmonic_extension(p, psi.meta["psi0"], x), rel=1e-9)


def test_bump_is_s_harmonic(psi):
    spec = HypersingularSpec(1, 0.5)
    scale = float(np.max(np.abs(psi(np.linspace(-3, 3, 601)))))
    for x in (-0.8, 0.0, 0.5, 0.85):
        r = frac_laplacian(spec, psi, x, support=3.0, breakpoints=(-3, -2, -1, 1, 2, 3))
        assert abs(r) <= 1e-2 * scale
        assert abs(r) < 1e-8


def test_bump_sign_for_higher_order():
    # s in (1, 2): psi0 = -profile, so the bump is negative outside
    psi = build_bump(PoissonKernel(1, 1.5))
    assert float(psi(np.array([2.5]))[0]) < 0


def test_bump_boundary_exponent(psi):
    slope, _, _ = boundary_exponent_fit(psi, (1e-3, 1e-1))
    assert abs(slope - 0.5) < 0.05


def test_blowup_trivial_j1(psi):
    res = blowup_sequence(psi, 1.0, [1])
    x = np.array([0.3, 1.2])
    np.testing.assert_allclose(res.profiles[0](x), psi(x - 1.0), rtol=1e-14)


def test_blowup_distances_decrease(psi):
    res = blowup_sequence(psi, 1.0, [4, 8, 16, 32])
    assert np.all(np.diff(res.l1_distances) < 0)
    assert res.kappa > 0


def test_blowup_mirror_direction(psi):
    a = blowup_sequence(psi, 1.0, [8, 16])
    b = blowup_sequence(psi, -1.0, [8, 16])
    np.testing.assert_allclose(a.l1_distances, b.l1_distances, rtol=1e-8)


def test_blowup_validation(psi):
    with pytest.raises(ValueError):
        blowup_sequence(psi, 0.5, [4])
    with pytest.raises(ValueError):
        blowup_sequence(psi, 1.0, [0])


def test_basis_validation():
    with pytest.raises(ValueError):
        ExteriorBasis(0.5, ((0.5, 1.5),), 6.0)
    with pytest.raises(ValueError):
        ExteriorBasis.two_sided(0.5, 7)
    b = ExteriorBasis.two_sided(0.5, 10)
    assert len(b) == 10 and b.supports[0] == (-6.0, -5.0)


def test_fit_zero_target(basis40):
    u, rep = fit_sharmonic(lambda x: np.zeros_like(x), basis40, X, check_points=None)
    assert np.all(rep.coefficients == 0.0)
    assert rep.sup_error == 0.0


def test_fit_quadratic(basis40, basis80):
    u40, r40 = fit_sharmonic(lambda x: x * x, basis40, X)
    u80, r80 = fit_sharmonic(lambda x: x * x, basis80, X, check_points=None)
    assert r40.sup_error <= 1e-2
    assert r80.sup_error < r40.sup_error
    assert r40.sharmonicity_residual < 1e-6
    assert r40.condition_estimate < 1e12


def test_fit_sine_improves(basis40, basis80):
    f = lambda x: np.sin(3 * x)  # noqa: E731
    _, r40 = fit_sharmonic(f, basis40, X, check_points=None)
    _, r80 = fit_sharmonic(f, basis80, X, check_points=None)
    assert r80.sup_error <= 5e-2
    assert r80.sup_error < r40.sup_error


def test_fit_with_derivatives(basis40):
    _, rep = fit_sharmonic(lambda x: x * x, basis40, X, ell=1, check_points=None)
    assert len(rep.deriv_errors) == 1
    assert rep.deriv_errors[0] < 5e-2


@given(st.floats(min_value=-2, max_value=2), st.floats(min_value=-2, max_value=2))
def test_fit_is_linear(a, b):
    basis = ExteriorBasis.two_sided(0.5, 20)
    f1 = lambda x: x * x  # noqa: E731
    f2 = np.cos
    ridge = 1e-6
    _, r1 = fit_sharmonic(f1, basis, X, ridge, check_points=None, n_check=5)
    _, r2 = fit_sharmonic(f2, basis, X, ridge, check_points=None, n_check=5)
    _, r12 = fit_sharmonic(lambda x: a * f1(x) + b * f2(x), basis, X, ridge, check_points=None, n_check=5)
    np.testing.assert_allclose(r12.coefficients, a * r1.coefficients + b * r2.coefficients, atol=1e-8)


def test_fit_residual_bounded_by_basis_residuals(basis40):
    # (-Delta)^s u = sum c_i (-Delta)^s u_i, so |res(u)| <= sum |c_i| |res(u_i)|
    pts = (-0.85, 0.5)
    _, rep = fit_sharmonic(lambda x: x * x, basis40, X, check_points=pts)
    per = []
    for i in range(len(basis40)):
        c = np.zeros(len(basis40))
        c[i] = 1.0
        per.append(sharmonicity_residual(sharmonic_function(basis40, c), basis40, pts))
    bound = float(np.abs(rep.coefficients) @ np.array(per))
    assert rep.sharmonicity_residual <= bound + 1e-12
    assert rep.sharmonicity_residual < 1e-6


@pytest.mark.parametrize("k", [1, 2, 3])
def test_scaling_invariance_of_monomial_fits(basis40, k):
    # eta^-k f(eta x) = f(x) for f = x^k, so the coefficients are unchanged
    eta = 1.7
    f = lambda x: x**k  # noqa: E731
    _, r = fit_sharmonic(f, basis40, X, check_points=None, n_check=5)
    _, rs = fit_sharmonic(lambda x: eta ** (-k) * f(eta * x), basis40, X, check_points=None, n_check=5)
    np.testing.assert_allclose(rs.coefficients, r.coefficients, atol=1e-6)


def test_sharmonicity_residual_helper(basis40):
    c = np.zeros(len(basis40))
    c[5] = 1.0
    assert sharmonicity_residual(sharmonic_function(basis40, c), basis40, [0.0]) < 1e-8


def test_harnack_gap_trivial():
    lo, hi, ratio = harnack_gap(lambda x: np.full_like(np.asarray(x, dtype=float), 2.0), 0.5)
    assert (lo, hi, ratio) == (2.0, 2.0, 1.0)
    lo, hi, ratio = harnack_gap(lambda x: np.asarray(x) ** 2, 0.5)
    assert lo == 0.0 and ratio == 0.0 and hi == pytest.approx(0.25)


def test_harnack_gap_negativity():
    with pytest.raises(ValueError):
        harnack_gap(lambda x: np.asarray(x) - 0.1, 0.5)
    with pytest.raises(ValueError):
        harnack_gap(lambda x: np.ones_like(x), 1.5)


def test_harnack_demo():
    demo = harnack_demo()
    assert demo.ratio <= 1e-2
    assert demo.sup_r >= 0.5**2 / 8


@pytest.fixture(scope="module")
def histories():
    return polynomial_histories(20)


def test_caputo_fit_constant(histories):
    rep = fit_caputo_stationary(lambda t: 3.0 + 0 * t, 0.5, histories[:1], ridge=0.0)
    assert rep.sup_error < 1e-10


def test_caputo_fit_linear(histories):
    rep = fit_caputo_stationary(lambda t: t, 0.5, histories)
    assert rep.sup_error <= 5e-2
    assert rep.sharmonicity_residual <= rep.extras["residual_bound"] + 1e-12
    small = fit_caputo_stationary(lambda t: t, 0.5, histories[:5])
    assert rep.sup_error <= small.sup_error + 1e-12


def test_caputo_fit_span_beats_single(histories):
    f = lambda t: (t - 1.0) ** 2  # noqa: E731
    full = fit_caputo_stationary(f, 0.5, histories)
    single = min(fit_caputo_stationary(f, 0.5, [h]).sup_error for h in histories[:6])
    assert full.sup_error < single


def test_caputo_fit_window_guard(histories):
    with pytest.raises(ValueError):
        fit_caputo_stationary(lambda t: t, 0.5, histories[:2], window=(1.01, 2.0))


def test_rank_warning():
    basis = ExteriorBasis.two_sided(0.5, 20)
    with pytest.warns(AccuracyWarning):
        fit_sharmonic(lambda x: x * x, basis, X, ridge=0.0, check_points=None, n_check=5)
