"""Recover the slide profile for a constant descent time and compare with the cycloid."""

from __future__ import annotations

import numpy as np

from fracdense.apps import SlideProblem, cycloid_fprime_sq, tautochrone_forward, tautochrone_recover

g, T = 9.81, 1.0
f_exact, r = cycloid_fprime_sq(T, g)
H = np.geomspace(0.04 * r, 1.95 * r, 400)
rec = tautochrone_recover(SlideProblem(g, lambda h: T, 2 * r), H)

print(f"cycloid radius r = {r:.6f}")
print(f"{'h / r':>8} {'recovered':>14} {'cycloid':>14}")
for h in np.geomspace(0.05 * r, 1.9 * r, 8):
    i = int(np.argmin(np.abs(H - h)))
    print(f"{H[i] / r:8.3f} {rec.fprime_sq[i]:14.8f} {f_exact(H[i]):14.8f}")

# descent time from several heights along the exact cycloid
for h in (0.1 * r, r, 1.9 * r):
    direct, caputo = tautochrone_forward(f_exact, g, h)
    print(f"h = {h:.4f}: T direct {direct:.10f}, T via Caputo {caputo:.10f}")
