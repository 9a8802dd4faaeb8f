"""Per-axis estimate matrices and the location correlation matrix."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from core.errors import DegenerateInput, InvalidInput
from core.model.dataset import AXES, FingerprintDataset, FingerprintRecord, Position, check_axis

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-10


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class AxisEstimateMatrix:
    """Estimates of M fingerprints by N technologies along one axis.

    ``entries[j, i]`` is technology i's estimate of fingerprint j and
    ``truth[j]`` the true coordinate. ``columns`` maps each column back to its
    technology index in the originating dataset, so hygiene can drop columns
    without losing track of who is who.
    """

    axis: str
    entries: np.ndarray
    truth: np.ndarray
    columns: Tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        check_axis(self.axis)
        entries = _frozen(self.entries)
        truth = _frozen(self.truth)
        if entries.ndim != 2:
            raise InvalidInput(f"entries must be a 2-D matrix, got shape {entries.shape}")
        if truth.shape != (entries.shape[0],):
            raise InvalidInput(f"truth has shape {truth.shape}, expected ({entries.shape[0]},)")
        if not (np.all(np.isfinite(entries)) and np.all(np.isfinite(truth))):
            raise InvalidInput("Axis matrix entries and truth must be finite")
        columns = tuple(self.columns) if self.columns else tuple(range(entries.shape[1]))
        if len(columns) != entries.shape[1]:
            raise InvalidInput(f"{len(columns)} column labels for {entries.shape[1]} columns")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "truth", truth)
        object.__setattr__(self, "columns", columns)

    @property
    def n_fingerprints(self) -> int:
        return self.entries.shape[0]

    @property
    def n_technologies(self) -> int:
        return self.entries.shape[1]

    def select_columns(self, keep: List[int]) -> "AxisEstimateMatrix":
        """Matrix restricted to the given column positions (positions, not technology ids)."""
        return AxisEstimateMatrix(
            self.axis,
            self.entries[:, keep],
            self.truth,
            tuple(self.columns[k] for k in keep),
        )


@dataclass(frozen=True)
class CorrelationMatrix:
    """C = UᵀU for one axis."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _frozen(self.entries))

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.entries), initial=0.0)))
        return bool(np.all(np.abs(self.entries - self.entries.T) <= tol * scale))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def is_positive_definite(self) -> bool:
        """True if a Cholesky factorization exists."""
        try:
            np.linalg.cholesky(self.entries)
        except np.linalg.LinAlgError:
            return False
        return True


def build_axis_matrix(dataset: FingerprintDataset, axis: str) -> AxisEstimateMatrix:
    """Collect one axis of a dataset into an M×N matrix plus truth vector.

    Raises:
        InvalidInput: If the dataset is empty or the axis unknown
    """
    check_axis(axis)
    if dataset is None or len(dataset) == 0:
        raise InvalidInput("Cannot build an axis matrix from an empty dataset")

    entries = np.array(
        [[estimate.coordinate(axis) for estimate in record.estimates] for record in dataset.records],
        dtype=float,
    )
    truth = np.array([record.true_position.coordinate(axis) for record in dataset.records], dtype=float)
    return AxisEstimateMatrix(axis, entries, truth)


def dataset_from_axis_matrices(
    matrices: Dict[str, AxisEstimateMatrix],
    technologies: Tuple[str, ...],
    point_ids: List[str],
) -> FingerprintDataset:
    """Inverse of :func:`build_axis_matrix` applied to all three axes."""
    missing = [a for a in AXES if a not in matrices]
    if missing:
        raise InvalidInput(f"Missing axis matrices: {missing}")

    records = []
    for j, point_id in enumerate(point_ids):
        truth = Position(*(matrices[a].truth[j] for a in AXES))
        estimates = tuple(
            Position(*(matrices[a].entries[j, i] for a in AXES)) for i in range(len(technologies))
        )
        records.append(FingerprintRecord(point_id, truth, estimates))
    return FingerprintDataset(technologies, tuple(records))


def correlation_matrix(matrix: AxisEstimateMatrix) -> CorrelationMatrix:
    """Information location correlation matrix C = UᵀU."""
    u = matrix.entries
    c = u.T @ u
    # Exact symmetry; the product is symmetric up to summation order only
    return CorrelationMatrix(0.5 * (c + c.T))


def _full_rank(columns: np.ndarray, tol: float) -> bool:
    singular = np.linalg.svd(columns, compute_uv=False)
    if singular.size == 0 or singular[0] == 0.0:
        return False
    return bool(singular[-1] / singular[0] > tol) and columns.shape[1] <= columns.shape[0]


def remove_dependent_columns(
    matrix: AxisEstimateMatrix, tol: float = DEFAULT_RANK_TOL
) -> Tuple[AxisEstimateMatrix, List[int]]:
    """Drop linearly dependent technology columns.

    Columns are scanned in order; a column is kept if the kept set stays
    numerically full rank (smallest/largest singular value above ``tol``).
    Earlier columns therefore win over later dependent ones.

    Returns:
        The reduced matrix and the technology ids (from ``matrix.columns``) removed.

    Raises:
        InvalidInput: If ``tol`` is not positive
        DegenerateInput: If every entry is zero
    """
    if not tol > 0:
        raise InvalidInput(f"Rank tolerance must be positive, got {tol}")
    if not np.any(matrix.entries):
        raise DegenerateInput(f"Axis {matrix.axis}: estimate matrix is all zeros")

    keep: List[int] = []
    removed: List[int] = []
    for k in range(matrix.n_technologies):
        candidate = keep + [k]
        if _full_rank(matrix.entries[:, candidate], tol):
            keep = candidate
        else:
            removed.append(matrix.columns[k])

    if removed:
        logger.warning(f"Axis {matrix.axis}: removed linearly dependent technology columns {removed}")
    return matrix.select_columns(keep), removed

