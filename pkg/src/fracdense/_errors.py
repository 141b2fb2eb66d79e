"""Exception and warning types shared across the package."""

from __future__ import annotations


class ConvergenceError(RuntimeError):
    """An iterative procedure hit its cap before meeting its stopping rule."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature exhausted its refinement depth.

    The best available estimate is kept on ``value`` and ``error``.
    """

    def __init__(self, message: str, value: float, error: float) -> None:
        super().__init__(message)
        self.value = value
        self.error = error


class ConsistencyError(RuntimeError):
    """Two independent routes to the same quantity disagree."""


class AccuracyWarning(UserWarning):
    """A result was produced but its error estimate exceeds the target."""
