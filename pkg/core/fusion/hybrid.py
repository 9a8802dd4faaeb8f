"""Hybrid estimator: one coefficient vector per axis, fitted independently."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from core.errors import DegenerateInput, InvalidInput
from core.model.dataset import AXES, FingerprintDataset, Position
from core.model.matrix import build_axis_matrix, remove_dependent_columns
from core.penalty.base import PenaltyFunction
from core.simplex.projection import CoefficientVector
from core.solver.gpm import SolverConfig, SolverTrace, solve_gpm
from core.solver.objective import AxisObjective

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HybridModel:
    """Fitted fusion weights for x, y and z.

    ``traces`` keeps the solver record of each axis for inspection; it is not
    part of equality and is not serialized.
    """

    technologies: Tuple[str, ...]
    penalty: PenaltyFunction
    per_axis_alpha: Dict[str, CoefficientVector]
    flags: Tuple[str, ...] = ()
    traces: Dict[str, SolverTrace] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.technologies)
        for axis in AXES:
            alpha = self.per_axis_alpha.get(axis)
            if alpha is None:
                raise InvalidInput(f"Hybrid model is missing weights for axis {axis}")
            if len(alpha) != n:
                raise InvalidInput(f"Axis {axis} has {len(alpha)} weights for {n} technologies")

    def alpha(self, axis: str) -> CoefficientVector:
        return self.per_axis_alpha[axis]


def fit_axis(
    dataset: FingerprintDataset, axis: str, penalty: PenaltyFunction, cfg: SolverConfig
) -> Tuple[CoefficientVector, Optional[SolverTrace], Tuple[str, ...]]:
    """Fit the weights of one axis, dropping dependent technologies first.

    An axis whose estimates are all zero carries no information and gets
    uniform weights.
    """
    n = dataset.n_technologies
    matrix = build_axis_matrix(dataset, axis)
    try:
        reduced, removed = remove_dependent_columns(matrix)
    except DegenerateInput:
        logger.debug(f"Axis {axis}: no information, using uniform weights")
        return CoefficientVector.uniform(n), None, (f"{axis}:degenerate",)

    alpha, trace = solve_gpm(AxisObjective(reduced, penalty), cfg)
    flags = tuple(f"{axis}:{flag}" for flag in trace.flags)
    if removed:
        names = ",".join(dataset.technologies[i] for i in removed)
        flags += (f"{axis}:dropped={names}",)
    return alpha.expand(reduced.columns, n), trace, flags


def fit_hybrid(
    dataset: FingerprintDataset,
    penalty: PenaltyFunction,
    cfg: Optional[SolverConfig] = None,
) -> HybridModel:
    """Fit a coefficient vector per axis by the gradient projection method.

    Raises:
        InvalidInput: If the dataset is empty or a step size is invalid
        NumericalFailure: Propagated from the solver
    """
    if dataset is None or len(dataset) == 0:
        raise InvalidInput("Cannot fit a hybrid model on an empty dataset")
    cfg = cfg or SolverConfig()

    alphas: Dict[str, CoefficientVector] = {}
    traces: Dict[str, SolverTrace] = {}
    flags: Tuple[str, ...] = ()
    for axis in AXES:
        alpha, trace, axis_flags = fit_axis(dataset, axis, penalty, cfg)
        alphas[axis] = alpha
        if trace is not None:
            traces[axis] = trace
        flags += axis_flags

    logger.debug(
        f"Fitted hybrid model on {len(dataset)} fingerprints: "
        + ", ".join(f"{a}={np.round(alphas[a].weights, 4).tolist()}" for a in AXES)
    )
    return HybridModel(dataset.technologies, penalty, alphas, flags, traces)


def predict(model: HybridModel, estimates: Sequence[Position]) -> Position:
    """Convex combination of the technology estimates, axis by axis.

    Raises:
        InvalidInput: If the number of estimates does not match the model
    """
    if len(estimates) != len(model.technologies):
        raise InvalidInput(f"Expected {len(model.technologies)} estimates, got {len(estimates)}")
    coords = {}
    for axis in AXES:
        values = np.array([e.coordinate(axis) for e in estimates])
        coords[axis] = float(model.per_axis_alpha[axis].weights @ values)
    return Position(**coords)


def training_objective(model: HybridModel, dataset: FingerprintDataset, axis: str) -> float:
    """Σ_j V(residual_j) of the model's weights on ``dataset`` for one axis."""
    matrix = build_axis_matrix(dataset, axis)
    return AxisObjective(matrix, model.penalty).value(model.per_axis_alpha[axis])
