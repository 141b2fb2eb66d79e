from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdense.ball import (
    BoundaryPoint,
    ExtensionRule,
    GreenKernel,
    PoissonKernel,
    boundary_limit_density,
    direct_boundary_limit,
    eta_integral,
    eta_integral_quad,
    green_kernel,
    green_solution,
    harmonic_extension,
    poisson_kernel,
    solve_dirichlet,
    sphere_area,
    torsion_constant,
    torsion_function,
)
from fracdense.fraclap import HypersingularSpec, frac_laplacian


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("n,s", [(1, 0.5), (1, 0.3), (1, 0.8), (2, 0.5), (2, 1.0), (1, 1.5)])
@pytest.mark.parametrize("r", [1e-3, 0.5, 3.0, 1e3, 1e6, 1e10])
def test_eta_integral_against_mpmath(n, s, r):
    ref = float(mp.mpf(r) ** s / s * mp.hyp2f1(n / 2.0, s, s + 1, -r))
    assert float(eta_integral(np.array([r]), n, s)[0]) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("r", [0.2, 5.0, 200.0])
def test_eta_quad_route_agrees(r):
    assert eta_integral_quad(r, 1, 0.5) == pytest.approx(float(eta_integral(np.array([r]), 1, 0.5)[0]), rel=1e-11)


@given(
    st.floats(min_value=-0.95, max_value=0.95),
    st.floats(min_value=-0.95, max_value=0.95),
    st.sampled_from([0.3, 0.5, 0.75]),
)
def test_green_symmetric_and_positive(x, y, s):
    if abs(x - y) < 1e-6:
        return
    g = GreenKernel(1, s)
    a = green_kernel(g, x, y)
    assert a > 0
    assert a == pytest.approx(green_kernel(g, y, x), rel=1e-13)


def test_green_closed_vs_quad():
    g = GreenKernel(1, 0.4)
    assert green_kernel(g, 0.1, -0.6) == pytest.approx(green_kernel(g, 0.1, -0.6, method="quad"), rel=1e-10)


def test_green_rejects_outside():
    with pytest.raises(ValueError):
        green_kernel(GreenKernel(1, 0.5), 1.2, 0.0)
    with pytest.raises(ValueError):
        green_kernel(GreenKernel(1, 0.5), 0.3, 0.3)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.8, 1.0, 1.5])
@pytest.mark.parametrize("x", [-0.7, 0.0, 0.45])
def test_torsion_closed_form_n1(s, x):
    g = GreenKernel(1, s)
    assert solve_dirichlet(g, lambda y: np.ones_like(y), x) == pytest.approx(float(torsion_function(1, s, x)), rel=1e-8)


def test_torsion_closed_form_n2():
    g = GreenKernel(2, 0.5)
    x = np.array([0.3, -0.2])
    ref = torsion_constant(2, 0.5) * (1 - x @ x) ** 0.5
    assert solve_dirichlet(g, lambda r: np.ones_like(r), x) == pytest.approx(ref, rel=1e-8)


def test_classical_torsion_s1():
    # s = 1: -u'' = 1 on (-1, 1) gives (1 - x^2)/2
    assert torsion_constant(1, 1.0) == pytest.approx(0.5)


@pytest.mark.parametrize("f", [lambda x: np.ones_like(x), lambda x: x * x, lambda x: np.cos(2 * x)])
def test_green_solution_inverts_operator(f):
    s = 0.5
    u = green_solution(GreenKernel(1, s), f)
    spec = HypersingularSpec(1, s)
    for x in (-0.6, 0.0, 0.35):
        val = frac_laplacian(spec, u, x, support=1.0, breakpoints=(-1.0, 1.0))
        assert val == pytest.approx(float(f(np.array([x]))[0]), abs=1e-7)


def test_green_solution_vanishes_outside():
    u = green_solution(GreenKernel(1, 0.5), lambda x: np.ones_like(x))
    assert np.all(u(np.array([-1.5, 1.0, 1.2])) == 0.0)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
def test_poisson_constant_closed_form(s):
    assert PoissonKernel(1, s).gamma_nsigma == pytest.approx(math.sin(math.pi * s) / math.pi, rel=1e-12)
    assert PoissonKernel(2, s).gamma_nsigma == pytest.approx(math.sin(math.pi * s) / math.pi**2, rel=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.4, -0.8])
def test_poisson_unit_mass(x):
    # the extension of g = 1 outside is 1 inside (s < 1); y = +-1/t
    s = 0.5
    gam = PoissonKernel(1, s).gamma_nsigma
    x = mp.mpf(x)

    def dens(t, sgn):
        y = sgn / t
        return gam * (1 - x * x) ** s * (y * y - 1) ** (-s) / abs(x - y) / t**2

    with mp.workdps(30):
        mass = sum(mp.quad(lambda t: dens(t, sgn), [0, 1]) for sgn in (1, -1))
    assert float(mass) == pytest.approx(1.0, rel=1e-10)


def test_poisson_kernel_validation():
    with pytest.raises(ValueError):
        PoissonKernel(1, 1.0)
    with pytest.raises(ValueError):
        poisson_kernel(PoissonKernel(1, 0.5), 0.2, 0.9)


def bump23(y):
    r = np.abs(np.asarray(y, dtype=float))
    out = np.zeros_like(r)
    m = (r > 2) & (r < 3)
    out[m] = np.exp(-1.0 / ((r[m] - 2) * (3 - r[m])))
    return out


def test_extension_rule_matches_adaptive():
    p = PoissonKernel(1, 0.5)
    rule = ExtensionRule.on_intervals(p, [(-3, -2), (2, 3)], 48)
    xs = np.array([-0.5, 0.0, 0.9])
    np.testing.assert_allclose(rule.apply(bump23, xs), [harmonic_extension(p, bump23, x) for x in xs], rtol=1e-9)


def test_extension_is_s_harmonic():
    p = PoissonKernel(1, 0.5)
    rule = ExtensionRule.on_intervals(p, [(-3, -2), (2, 3)], 48)

    def u(x):
        x = np.asarray(x, dtype=float)
        out = bump23(x)
        inside = np.abs(x) < 1
        if np.any(inside):
            out[inside] = rule.apply(bump23, x[inside])
        return out

    spec = HypersingularSpec(1, 0.5)
    for x in (-0.5, 0.2):
        assert abs(frac_laplacian(spec, u, x, support=3.0, breakpoints=(-3, -2, -1, 1, 2, 3))) < 1e-8


def test_boundary_point():
    b = BoundaryPoint(np.array([1.0]), np.array([-1.0]))
    assert b.admissible
    assert float(b.point(0.1)[0]) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        BoundaryPoint(np.array([2.0]), np.array([-1.0]))


def test_boundary_limit_torsion():
    # u = kappa (1-x^2)^s: eps^-s u(1 - eps) -> kappa 2^s
    s = 0.5
    g = GreenKernel(1, s)
    b = BoundaryPoint(np.array([1.0]), np.array([-1.0]))
    assert boundary_limit_density(g, lambda x: np.ones_like(x), b) == pytest.approx(torsion_constant(1, s) * 2**s, rel=1e-9)


def test_boundary_limit_direct_extrapolation_agrees():
    g = GreenKernel(1, 0.5)
    b = BoundaryPoint(np.array([1.0]), np.array([-1.0]))
    f = lambda y: np.cos(y) + y  # noqa: E731
    lim, q = direct_boundary_limit(g, f, b)
    assert lim == pytest.approx(boundary_limit_density(g, f, b), rel=1e-5)
    assert len(q) == 5


def test_boundary_limit_tangent_direction():
    g = GreenKernel(2, 0.5)
    b = BoundaryPoint(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert boundary_limit_density(g, lambda r: np.ones_like(r), b) == 0.0
    with pytest.raises(ValueError):
        boundary_limit_density(g, lambda r: np.ones_like(r), b, strict=True)


def test_boundary_limit_two_dimensional_torsion():
    s = 0.5
    g = GreenKernel(2, s)
    w = np.array([-math.cos(0.3), math.sin(0.3)])
    b = BoundaryPoint(np.array([1.0, 0.0]), w)
    ref = torsion_constant(2, s) * (-2 * float(b.e @ w)) ** s
    assert boundary_limit_density(g, lambda r: np.ones_like(r), b) == pytest.approx(ref, rel=1e-7)
