"""Grid-sampled functions with interpolating evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.interpolate import CubicSpline


@dataclass(frozen=True)
class FracOrder:
    """A positive order ``s`` split as ``s = m + sigma`` with ``sigma`` in ``[0, 1)``."""

    s: float

    def __post_init__(self) -> None:
        if not self.s > 0:
            raise ValueError(f"order must be positive, got {self.s}")

    @property
    def m(self) -> int:
        return int(np.floor(self.s))

    @property
    def sigma(self) -> float:
        return self.s - self.m


@dataclass(frozen=True)
class SampledFunction:
    """Values on a strictly increasing grid plus an evaluator.

    By default evaluation is a not-a-knot cubic spline through the samples.
    Callers that know a better representation (a closed form, a quadrature
    formula, a spline in a transformed variable) pass it as ``interpolant``;
    it must accept arrays.  Outside ``[grid[0], grid[-1]]`` the spline returns
    ``fill`` unless ``extrapolate`` is set.

    For ``radial=True`` the grid is in ``|x|`` and points of shape ``(..., n)``
    are reduced to their norms before evaluation.
    """

    grid: np.ndarray
    values: np.ndarray
    interpolant: Callable[[np.ndarray], np.ndarray] | None = None
    radial: bool = False
    fill: float = 0.0
    extrapolate: bool = False
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def spline(self) -> CubicSpline:
        sp = self.meta.get("_spline")
        if sp is None:
            sp = CubicSpline(self.grid, self.values)
            self.meta["_spline"] = sp
        return sp

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.radial and x.ndim >= 1 and x.shape[-1] in (2, 3) and self.meta.get("dim", 1) > 1:
            x = np.linalg.norm(x, axis=-1)
        if self.interpolant is not None:
            return np.asarray(self.interpolant(x), dtype=float)
        out = self.spline(x)
        if not self.extrapolate:
            outside = (x < self.grid[0]) | (x > self.grid[-1])
            out = np.where(outside, self.fill, out)
        return out

    def derivative(self, k: int = 1) -> Callable[[np.ndarray], np.ndarray]:
        """``k``-th derivative of the spline through the samples."""
        return self.spline.derivative(k)
