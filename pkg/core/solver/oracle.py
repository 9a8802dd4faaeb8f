"""Exhaustive simplex-lattice search, used to validate the gradient projection solver."""
import logging
from functools import lru_cache

import numpy as np

from core.errors import InvalidInput, Unsupported
from core.simplex.projection import CoefficientVector
from core.solver.objective import AxisObjective

logger = logging.getLogger(__name__)

MAX_ORACLE_TECHNOLOGIES = 5
CHUNK = 65_536


@lru_cache(maxsize=1024)
def _compositions(n: int, total: int) -> np.ndarray:
    """All non-negative integer vectors of length n summing to ``total``, lexicographic."""
    if n == 1:
        return np.array([[total]], dtype=np.int64)
    if n == 2:
        first = np.arange(total, -1, -1, dtype=np.int64)
        return np.column_stack([first, total - first])
    blocks = []
    for first in range(total, -1, -1):
        rest = _compositions(n - 1, total - first)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def simplex_lattice(n: int, resolution: float) -> np.ndarray:
    """Points of the simplex whose coordinates are multiples of ``resolution``."""
    if not 0 < resolution <= 1:
        raise InvalidInput(f"Lattice resolution must lie in (0, 1], got {resolution}")
    steps = int(round(1.0 / resolution))
    return _compositions(n, steps) / steps


def solve_oracle(obj: AxisObjective, resolution: float = 1e-3) -> CoefficientVector:
    """Best lattice point of the simplex for one axis objective.

    Ties go to the first point in lattice order, which favours earlier
    technologies.

    Raises:
        Unsupported: If the objective has more than five technologies
        InvalidInput: If ``resolution`` is outside (0, 1]
    """
    n = obj.n_technologies
    if n > MAX_ORACLE_TECHNOLOGIES:
        raise Unsupported(f"Lattice oracle supports at most {MAX_ORACLE_TECHNOLOGIES} technologies, got {n}")

    lattice = simplex_lattice(n, resolution)
    u = obj.matrix.entries
    truth = obj.matrix.truth[:, None]

    best_value = np.inf
    best_index = 0
    for start in range(0, len(lattice), CHUNK):
        block = lattice[start:start + CHUNK]
        values = np.sum(obj.penalty.value(u @ block.T - truth), axis=0)
        k = int(np.argmin(values))
        if values[k] < best_value:
            best_value = float(values[k])
            best_index = start + k

    logger.debug(f"Oracle searched {len(lattice)} lattice points, best f={best_value:.10g}")
    return CoefficientVector(lattice[best_index])
