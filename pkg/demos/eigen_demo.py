"""First Dirichlet eigenvalue of (-Delta)^s on (-1, 1) across s."""

from __future__ import annotations

import math

from fracdense.ball import GreenKernel
from fracdense.eigen import eigen_residual, power_iterate

print(f"{'s':>5} {'lambda1':>14} {'slope':>8} {'residual':>10}")
for s in (0.25, 0.5, 0.75, 1.0):
    res = power_iterate(GreenKernel(1, s))
    print(f"{s:5.2f} {res.lambda1:14.10f} {res.boundary_slope:8.4f} {eigen_residual(res):10.2e}")
print(f"pi^2/4 = {math.pi ** 2 / 4:.10f}")
