"""A nonnegative 1/2-harmonic function on B_1 whose infimum on B_1/2 is zero."""

from __future__ import annotations

from fracdense.approx import harnack_demo

demo = harnack_demo(s=0.5, r=0.5)
print(f"inf on B_r = {demo.inf_r:.3e}")
print(f"sup on B_r = {demo.sup_r:.3e}")
print(f"ratio      = {demo.ratio:.3e}")
