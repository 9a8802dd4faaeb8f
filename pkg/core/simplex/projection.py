"""Euclidean projection onto the probability simplex.

The problem min ||α - z||² s.t. α ≥ 0, Σα = 1 has the solution
α_i = [λ* - c_i]⁺ with c = -z, where λ* is the unique root of
g(λ) = Σ_i [λ - c_i]⁺ - 1. Two ways of finding λ* are provided: an exact
scan over the sorted c (O(N log N)) and bisection on [min c, min c + 1].
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from core.errors import InvalidInput

logger = logging.getLogger(__name__)

SUM_TOL = 1e-10
BISECT_MAX_STEPS = 200

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True)
class CoefficientVector:
    """Fusion weights: a point of the probability simplex."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise InvalidInput("Coefficient vector must have at least one weight")
        if not np.all(np.isfinite(w)):
            raise InvalidInput(f"Coefficient vector has non-finite weights: {w}")
        if np.any(w < 0.0):
            raise InvalidInput(f"Coefficient vector has negative weights: {w}")
        if abs(w.sum() - 1.0) > SUM_TOL:
            raise InvalidInput(f"Coefficient weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "CoefficientVector":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def unit(cls, n: int, index: int) -> "CoefficientVector":
        w = np.zeros(n)
        w[index] = 1.0
        return cls(w)

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, i: int) -> float:
        return float(self.weights[i])

    def as_list(self) -> list:
        return [float(w) for w in self.weights]

    def expand(self, columns: Sequence[int], n: int) -> "CoefficientVector":
        """Scatter weights of a reduced problem back to ``n`` technologies; dropped ones get 0."""
        full = np.zeros(n)
        full[list(columns)] = self.weights
        return CoefficientVector(full)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CoefficientVector) and np.array_equal(self.weights, other.weights)

    def __hash__(self) -> int:
        return hash(self.weights.tobytes())


@dataclass(frozen=True)
class ProjectionCertificate:
    """Witness of the sorted scan: λ* = (1 + Σ_{i≤n} m_i)/n with m_n ≤ λ* ≤ m_{n+1}.

    ``m`` is the ascending sort of c = -z extended with m_{N+1} = m_1 + 1.
    ``n`` is 1-based.
    """

    n: int
    lam: float
    m: np.ndarray


def _check_input(v: ArrayLike) -> np.ndarray:
    z = np.asarray(v, dtype=float).reshape(-1)
    if z.size == 0:
        raise InvalidInput("Cannot project an empty vector")
    if not np.all(np.isfinite(z)):
        raise InvalidInput(f"Projection input must be finite, got {z}")
    return z


def _renormalize(alpha: np.ndarray) -> np.ndarray:
    """Spread the residual of Σα - 1 over the positive support."""
    support = alpha > 0.0
    count = int(support.sum())
    if count:
        alpha[support] -= (alpha.sum() - 1.0) / count
        np.maximum(alpha, 0.0, out=alpha)
    return alpha


def _sorted_threshold(z: np.ndarray) -> Tuple[int, float, np.ndarray]:
    c = -z
    m = np.sort(c, kind="stable")
    m_ext = np.append(m, m[0] + 1.0)
    n_range = np.arange(1, z.size + 1)
    lam = (1.0 + np.cumsum(m)) / n_range

    valid = (m_ext[:-1] <= lam) & (lam <= m_ext[1:])
    hits = np.flatnonzero(valid)
    if hits.size:
        n = int(hits[0]) + 1
    else:
        # Rounding pushed λ_n a hair outside its bracket; fall back to the
        # largest n with m_n < λ_n, which is the same root
        below = np.flatnonzero(m < lam)
        n = int(below[-1]) + 1 if below.size else 1
    return n, float(lam[n - 1]), m_ext


def _threshold_projection(z: np.ndarray) -> np.ndarray:
    # The projection is translation invariant; scanning z - max(z) keeps
    # z + λ from cancelling to zero when |z| is large
    shifted = z - z.max()
    _, lam, _ = _sorted_threshold(shifted)
    alpha = np.maximum(shifted + lam, 0.0)
    if not np.any(alpha > 0.0):
        alpha[int(np.argmax(z))] = 1.0
    return _renormalize(alpha)


def project_sorted_certified(v: ArrayLike) -> Tuple["CoefficientVector", ProjectionCertificate]:
    """Exact projection together with the certificate of the threshold scan.

    The certificate describes the scan on ``v`` itself. The weights come from
    the scan on ``v - max(v)``, which has the same projection.

    Raises:
        InvalidInput: If ``v`` is empty or has non-finite entries
    """
    z = _check_input(v)
    n, lam, m_ext = _sorted_threshold(z)
    return CoefficientVector(_threshold_projection(z)), ProjectionCertificate(n, lam, m_ext)


def project_sorted(v: ArrayLike) -> CoefficientVector:
    """Exact Euclidean projection of ``v`` onto the simplex by the sorted threshold scan.

    Raises:
        InvalidInput: If ``v`` is empty or has non-finite entries
    """
    return project_sorted_certified(v)[0]


def project_array(z: np.ndarray) -> np.ndarray:
    """Unchecked array form of :func:`project_sorted` for the solver's inner loop."""
    if z.size == 1:
        return np.ones(1)
    return _threshold_projection(z)


def _g(lam: float, c: np.ndarray) -> float:
    return float(np.maximum(lam - c, 0.0).sum() - 1.0)


def project_bisect(v: ArrayLike, eps_tol: float = 1e-12) -> CoefficientVector:
    """Projection onto the simplex with λ* found by bisection.

    g(min c) = -1 and g(min c + 1) ≥ 0, so the root is bracketed by
    [min c, min c + 1] for any input.

    Raises:
        InvalidInput: If ``eps_tol`` is not positive or ``v`` is invalid
    """
    if not eps_tol > 0:
        raise InvalidInput(f"Bisection tolerance must be positive, got {eps_tol}")
    z = _check_input(v)
    c = -z
    lo = float(c.min())
    hi = lo + 1.0

    for _ in range(BISECT_MAX_STEPS):
        if hi - lo < eps_tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _g(mid, c) < 0.0:
            lo = mid
        else:
            hi = mid

    lam = 0.5 * (lo + hi)
    alpha = np.maximum(lam - c, 0.0)
    if not np.any(alpha > 0.0):
        alpha[int(np.argmin(c))] = 1.0
    return CoefficientVector(_renormalize(alpha))
