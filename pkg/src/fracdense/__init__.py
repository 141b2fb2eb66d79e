"""Numerics for fractional operators: special functions, Caputo and fractional Laplacian
derivatives, Green and Poisson kernels of the ball, eigenpairs, and s-harmonic approximation."""

from __future__ import annotations

from ._errors import AccuracyWarning, ConsistencyError, ConvergenceError, QuadratureError
from .approx import (
    ExteriorBasis,
    FitReport,
    blowup_sequence,
    build_bump,
    fit_caputo_stationary,
    fit_sharmonic,
    harnack_demo,
    harnack_gap,
)
from .apps import (
    CombParams,
    SlideProblem,
    comb_transfer,
    ladder_cf,
    tautochrone_forward,
    tautochrone_recover,
)
from .ball import (
    BoundaryPoint,
    GreenKernel,
    PoissonKernel,
    boundary_limit_density,
    green_kernel,
    harmonic_extension,
    poisson_kernel,
    solve_dirichlet,
)
from .caputo import CaputoSpec, History, caputo_derivative, stationary_extension
from .eigen import EigenResult, power_iterate, spherical_mean
from .fraclap import HypersingularSpec, calibrate_normalization, frac_laplacian
from .quad import QuadratureRule, gauss_legendre, integrate_adaptive, integrate_power_singularity
from .sampled import FracOrder, SampledFunction
from .specialfn import MLParams, gamma, gammaln, mittag_leffler, mittag_leffler_array, rgamma

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_") and name != "annotations"]
