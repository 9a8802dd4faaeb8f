"""Interval curvature bounds that certify the constant step of the solver."""
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from core.errors import DegenerateInput, InvalidInput
from core.model.matrix import AxisEstimateMatrix
from core.penalty.base import PenaltyFunction

logger = logging.getLogger(__name__)

Beta = Union[float, str, None]


@dataclass(frozen=True)
class CurvatureBounds:
    """Curvature constants of one axis objective.

    Attributes:
        per_fingerprint_B: Upper bound of V″ over each fingerprint's residual interval
        per_fingerprint_b: Lower bound of V″ over the same interval
        L_max: max over technology pairs (i, t) of Σ_j |û_i^j û_t^j| B_j
        l_min: min over technologies i of Σ_j (û_i^j)² b_j
        beta_max: 2 / (N L_max), the exclusive upper end of the certified step window
        beta: Step size the bounds were evaluated for
        q: Contraction constant max{|1 - β N l_min|, |1 - β N L_max|}
        clamp_applied: Whether any V″ bound was regularized near t = 0
    """

    per_fingerprint_B: np.ndarray
    per_fingerprint_b: np.ndarray
    L_max: float
    l_min: float
    beta_max: float
    beta: float
    q: float
    clamp_applied: bool


def residual_intervals(matrix: AxisEstimateMatrix):
    """[min_i û_i^j - u^j, max_i û_i^j - u^j] for every fingerprint j."""
    lo = matrix.entries.min(axis=1) - matrix.truth
    hi = matrix.entries.max(axis=1) - matrix.truth
    return lo, hi


def contraction_constant(beta: float, n: int, l_min: float, L_max: float) -> float:
    return max(abs(1.0 - beta * n * l_min), abs(1.0 - beta * n * L_max))


def curvature_bounds(penalty: PenaltyFunction, matrix: AxisEstimateMatrix, beta: Beta = "auto") -> CurvatureBounds:
    """Evaluate B_j, b_j, L_max, l_min, the step window and q for one axis.

    Args:
        penalty: Penalty applied to each fingerprint's residual
        matrix: Axis matrix, full column rank
        beta: Explicit step in (0, beta_max), or "auto"/None for beta_max / 2

    Raises:
        DegenerateInput: If some technology column is identically zero
        InvalidInput: If an explicit beta lies outside (0, beta_max)
    """
    u = matrix.entries
    zero_columns = [matrix.columns[i] for i in range(u.shape[1]) if not np.any(u[:, i])]
    if zero_columns:
        raise DegenerateInput(f"Axis {matrix.axis}: technology columns {zero_columns} are all zero")

    lo, hi = residual_intervals(matrix)
    upper = np.empty(matrix.n_fingerprints)
    lower = np.empty(matrix.n_fingerprints)
    clamp_applied = False
    for j in range(matrix.n_fingerprints):
        upper[j], lower[j], clamped = penalty.curvature_range(float(lo[j]), float(hi[j]))
        clamp_applied = clamp_applied or clamped

    abs_u = np.abs(u)
    L_max = float(np.max(abs_u.T @ (upper[:, None] * abs_u)))
    l_min = float(np.min((u * u).T @ lower))
    n = matrix.n_technologies
    beta_max = 2.0 / (n * L_max)

    step = _resolve_beta(beta, beta_max)
    q = contraction_constant(step, n, l_min, L_max)

    if clamp_applied:
        logger.info(
            f"Axis {matrix.axis}: {penalty.spec} second derivative clamped near zero residual; "
            f"step window reflects the regularized curvature"
        )
    logger.debug(
        f"Axis {matrix.axis}: L_max={L_max:.6g} l_min={l_min:.6g} beta={step:.6g} "
        f"(max {beta_max:.6g}) q={q:.6g}"
    )
    return CurvatureBounds(upper, lower, L_max, l_min, beta_max, step, q, clamp_applied)


def _resolve_beta(beta: Beta, beta_max: float) -> float:
    if beta is None or (isinstance(beta, str) and beta.lower() == "auto"):
        return beta_max / 2.0
    try:
        value = float(beta)
    except (TypeError, ValueError):
        raise InvalidInput(f"Step size must be a number or 'auto', got {beta!r}") from None
    if not 0.0 < value < beta_max:
        raise InvalidInput(f"Step size {value} outside the certified window (0, {beta_max})")
    return value
