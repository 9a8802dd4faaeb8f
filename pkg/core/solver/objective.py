"""Per-axis fusion objective f(α) = Σ_j V(Σ_i α_i û_i^j - u^j) and its gradient."""
from dataclasses import dataclass
from typing import Union

import numpy as np

from core.errors import InvalidInput
from core.model.matrix import AxisEstimateMatrix
from core.penalty.base import PenaltyFunction
from core.simplex.projection import CoefficientVector

Weights = Union[CoefficientVector, np.ndarray, list, tuple]


@dataclass(frozen=True)
class AxisObjective:
    """Objective of one axis: an estimate matrix scored under a penalty."""

    matrix: AxisEstimateMatrix
    penalty: PenaltyFunction

    @property
    def n_technologies(self) -> int:
        return self.matrix.n_technologies

    def _weights(self, alpha: Weights) -> np.ndarray:
        w = alpha.weights if isinstance(alpha, CoefficientVector) else np.asarray(alpha, dtype=float)
        if w.shape != (self.n_technologies,):
            raise InvalidInput(
                f"Weight vector of length {w.size} does not match {self.n_technologies} technologies"
            )
        return w

    def residuals(self, alpha: Weights) -> np.ndarray:
        return self.matrix.entries @ self._weights(alpha) - self.matrix.truth

    def value(self, alpha: Weights) -> float:
        return float(np.sum(self.penalty.value(self.residuals(alpha))))

    def gradient(self, alpha: Weights) -> np.ndarray:
        return self.matrix.entries.T @ self.penalty.first_derivative(self.residuals(alpha))


def objective(obj: AxisObjective, alpha: Weights) -> float:
    """f(α) for one axis.

    Raises:
        InvalidInput: If the weight vector length does not match the matrix
    """
    return obj.value(alpha)


def gradient(obj: AxisObjective, alpha: Weights) -> np.ndarray:
    """∇f(α): component i is Σ_j û_i^j V′(residual_j).

    Raises:
        InvalidInput: If the weight vector length does not match the matrix
    """
    return obj.gradient(alpha)
