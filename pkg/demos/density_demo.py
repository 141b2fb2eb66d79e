"""Approximate x^2 on (-1, 1) by 1/2-harmonic functions built from exterior bumps."""

from __future__ import annotations

import numpy as np

from fracdense.approx import ExteriorBasis, fit_sharmonic

colloc = np.linspace(-0.5, 0.5, 61)
for count in (10, 20, 40, 80):
    basis = ExteriorBasis.two_sided(0.5, count)
    _, rep = fit_sharmonic(lambda x: x * x, basis, colloc)
    print(
        f"{count:3d} bumps: sup error {rep.sup_error:.3e}, "
        f"s-harmonicity residual {rep.sharmonicity_residual:.1e}, cond {rep.condition_estimate:.1e}"
    )
