"""Base penalty interface."""
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np


class PenaltyFunction(ABC):
    """Strictly convex scalar penalty V(t) applied to signed position errors.

    Implementations are vectorized: every method accepts a float or an
    ndarray and returns the same shape.
    """

    @property
    @abstractmethod
    def spec(self) -> str:
        """Round-trippable selection string (e.g. ``p2``, ``p1+eps:0.0001``)."""

    @abstractmethod
    def value(self, t):
        """V(t)."""

    @abstractmethod
    def first_derivative(self, t):
        """V′(t)."""

    @abstractmethod
    def second_derivative(self, t):
        """V″(t), finite everywhere (implementations clamp singular points)."""

    @abstractmethod
    def curvature_range(self, lo: float, hi: float) -> Tuple[float, float, bool]:
        """Bounds of V″ over the closed interval [lo, hi].

        Returns:
            (upper, lower, clamped) where ``clamped`` tells whether a singular
            or vanishing second derivative had to be regularized.
        """

    def __call__(self, t):
        return self.value(t)

    def total(self, residuals: np.ndarray) -> float:
        """Sum of V over a residual vector."""
        return float(np.sum(self.value(np.asarray(residuals, dtype=float))))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec!r})"
