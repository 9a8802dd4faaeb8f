"""Shared fixtures."""
import numpy as np
import pytest

from core.model.dataset import FingerprintDataset, FingerprintRecord, Position
from core.model.matrix import AxisEstimateMatrix
from core.penalty.power import PowerPenalty
from core.solver.objective import AxisObjective


@pytest.fixture
def two_by_two() -> AxisEstimateMatrix:
    """Truths (0, 1); technology 1 reads (0.1, 1.1), technology 2 reads (0.4, 0.6)."""
    return AxisEstimateMatrix("x", np.array([[0.1, 0.4], [1.1, 0.6]]), np.array([0.0, 1.0]))


@pytest.fixture
def two_by_two_objective(two_by_two) -> AxisObjective:
    return AxisObjective(two_by_two, PowerPenalty.mse())


def make_dataset(truth_x, estimates_x, technologies=None) -> FingerprintDataset:
    """1D dataset from true x values and an (M, N) array of x estimates."""
    estimates_x = np.asarray(estimates_x, dtype=float)
    names = technologies or tuple(f"t{i}" for i in range(estimates_x.shape[1]))
    records = tuple(
        FingerprintRecord(f"p{j}", Position(float(x)), tuple(Position(float(e)) for e in row))
        for j, (x, row) in enumerate(zip(truth_x, estimates_x))
    )
    return FingerprintDataset(tuple(names), records)


@pytest.fixture
def dataset_factory():
    return make_dataset


def noisy_instance(rng: np.random.Generator, n: int, m: int, noise=(0.05, 0.3)) -> AxisEstimateMatrix:
    """Truth in [0, 1] and per-technology Gaussian estimate noise of random scale."""
    truth = rng.uniform(0.0, 1.0, size=m)
    sigma = rng.uniform(*noise, size=n)
    entries = truth[:, None] + rng.standard_normal((m, n)) * sigma
    return AxisEstimateMatrix("x", entries, truth)


def biased_instance(rng: np.random.Generator, n: int, m: int) -> AxisEstimateMatrix:
    """Every estimate overshoots its truth by 0.5 to 2, so residuals never cross zero."""
    truth = rng.uniform(0.0, 1.0, size=m)
    entries = truth[:, None] + rng.uniform(0.5, 2.0, size=(m, n))
    return AxisEstimateMatrix("x", entries, truth)


@pytest.fixture
def instance_factory():
    return {"noisy": noisy_instance, "biased": biased_instance}
