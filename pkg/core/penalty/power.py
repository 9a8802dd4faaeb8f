"""Power penalties V(t) = |t|^p, p > 1."""
import logging
from typing import Tuple

import numpy as np

from core.errors import InvalidInput
from core.penalty.base import PenaltyFunction

logger = logging.getLogger(__name__)

# V″ is never evaluated closer to 0 than this (meters)
DELTA_CLAMP = 1e-6
PSEUDO_MAE_EPS = 1e-4


class PowerPenalty(PenaltyFunction):
    """|t|^p. ``p = 2`` is the squared error, ``p = 1 + ε`` the pseudo absolute error."""

    def __init__(self, p: float, delta_clamp: float = DELTA_CLAMP):
        p = float(p)
        if not p > 1.0 or not np.isfinite(p):
            raise InvalidInput(f"Power penalty needs a finite exponent p > 1, got {p}")
        if not delta_clamp > 0:
            raise InvalidInput(f"delta_clamp must be positive, got {delta_clamp}")
        self.p = p
        self.delta_clamp = float(delta_clamp)

    @classmethod
    def mse(cls) -> "PowerPenalty":
        return cls(2.0)

    @classmethod
    def pseudo_mae(cls, eps: float = PSEUDO_MAE_EPS) -> "PowerPenalty":
        return cls(1.0 + eps)

    @property
    def spec(self) -> str:
        if self.p == 2.0:
            return "p2"
        if self.p < 2.0:
            return f"p1+eps:{self.p - 1.0:.12g}"
        return f"p{self.p:.12g}"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PowerPenalty) and other.p == self.p and other.delta_clamp == self.delta_clamp

    def __hash__(self) -> int:
        return hash((self.p, self.delta_clamp))

    def value(self, t):
        return np.abs(t) ** self.p

    def first_derivative(self, t):
        if self.p == 2.0:
            return 2.0 * np.asarray(t, dtype=float) if np.ndim(t) else 2.0 * float(t)
        return self.p * np.sign(t) * np.abs(t) ** (self.p - 1.0)

    def _second_at_magnitude(self, a):
        return self.p * (self.p - 1.0) * a ** (self.p - 2.0)

    def second_derivative(self, t):
        p = self.p
        if p == 2.0:
            return np.full(np.shape(t), 2.0) if np.ndim(t) else 2.0

        a = np.abs(np.asarray(t, dtype=float))
        if p < 2.0:
            safe = np.where(a == 0.0, self.delta_clamp, a)
            out = self._second_at_magnitude(safe)
        else:
            out = np.where(a == 0.0, 0.0, self._second_at_magnitude(a))
        return out if np.ndim(t) else float(out)

    def curvature_range(self, lo: float, hi: float) -> Tuple[float, float, bool]:
        if lo > hi:
            lo, hi = hi, lo
        if self.p == 2.0:
            return 2.0, 2.0, False

        # |t|^(p-2) is monotone in |t|, so only the nearest and farthest
        # magnitudes of the interval matter
        if lo <= 0.0 <= hi:
            near = 0.0
        else:
            near = min(abs(lo), abs(hi))
        far = max(abs(lo), abs(hi))

        clamped = near < self.delta_clamp
        near = max(near, self.delta_clamp)
        far = max(far, near)
        at_near = float(self._second_at_magnitude(near))
        at_far = float(self._second_at_magnitude(far))
        if self.p < 2.0:
            return at_near, at_far, clamped
        return at_far, at_near, clamped
