"""Section-based fusion: separate coefficient vectors per corridor section."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import HybridLocError, InvalidInput
from core.fusion.hybrid import HybridModel, fit_hybrid, predict
from core.model.dataset import FingerprintDataset, Position, check_axis
from core.penalty.base import PenaltyFunction
from core.solver.gpm import SolverConfig

logger = logging.getLogger(__name__)


class SectioningMode(str, Enum):
    TWO_LEVEL = "two_level"
    RFID_ORACLE = "rfid_oracle"


@dataclass(frozen=True)
class SectionPartition:
    """Ordered sections [b_s, b_{s+1}) along one axis; the last one is closed."""

    boundaries: Tuple[float, ...]
    axis: str = "x"

    def __post_init__(self) -> None:
        check_axis(self.axis)
        bounds = tuple(float(b) for b in self.boundaries)
        if len(bounds) < 2:
            raise InvalidInput("A partition needs at least two boundaries")
        if not all(np.isfinite(bounds)):
            raise InvalidInput(f"Partition boundaries must be finite: {bounds}")
        if any(b1 <= b0 for b0, b1 in zip(bounds, bounds[1:])):
            raise InvalidInput(f"Partition boundaries must be strictly ascending: {bounds}")
        object.__setattr__(self, "boundaries", bounds)

    @classmethod
    def uniform(cls, length: float, sections: int, axis: str = "x") -> "SectionPartition":
        """``sections`` equal sections covering [0, length]."""
        if sections < 1:
            raise InvalidInput(f"Need at least one section, got {sections}")
        if not length > 0:
            raise InvalidInput(f"Corridor length must be positive, got {length}")
        return cls(tuple(length * s / sections for s in range(sections + 1)), axis)

    @property
    def n_sections(self) -> int:
        return len(self.boundaries) - 1

    @property
    def start(self) -> float:
        return self.boundaries[0]

    @property
    def end(self) -> float:
        return self.boundaries[-1]

    def check_section(self, section: int) -> int:
        if not 0 <= int(section) < self.n_sections:
            raise InvalidInput(f"Unknown section {section}; partition has {self.n_sections}")
        return int(section)

    def width(self, section: int) -> float:
        s = self.check_section(section)
        return self.boundaries[s + 1] - self.boundaries[s]

    def midpoint(self, section: int) -> float:
        s = self.check_section(section)
        return 0.5 * (self.boundaries[s] + self.boundaries[s + 1])

    def locate(self, value: float, clamp: bool = False) -> int:
        """Index of the section containing ``value``.

        Args:
            value: Coordinate on the partition axis
            clamp: Map values outside the partition to the nearest end section
                   instead of failing

        Raises:
            InvalidInput: If ``value`` is outside the partition and ``clamp`` is off
        """
        if not np.isfinite(value):
            raise InvalidInput(f"Cannot locate non-finite coordinate {value}")
        if value < self.start or value > self.end:
            if not clamp:
                raise InvalidInput(f"Coordinate {value} outside partition [{self.start}, {self.end}]")
            return 0 if value < self.start else self.n_sections - 1
        index = int(np.searchsorted(self.boundaries, value, side="right")) - 1
        return min(index, self.n_sections - 1)


@dataclass(frozen=True)
class SectionedModel:
    """Global model for section estimation plus one model per section."""

    partition: SectionPartition
    global_model: HybridModel
    per_section_models: Tuple[HybridModel, ...]
    sectioning_mode: SectioningMode
    section_sizes: Tuple[int, ...] = ()
    flags: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.per_section_models) != self.partition.n_sections:
            raise InvalidInput(
                f"{len(self.per_section_models)} section models for {self.partition.n_sections} sections"
            )

    @property
    def technologies(self) -> Tuple[str, ...]:
        return self.global_model.technologies


def _assign_sections(
    dataset: FingerprintDataset,
    partition: SectionPartition,
    global_model: HybridModel,
    mode: SectioningMode,
) -> List[List[int]]:
    members: List[List[int]] = [[] for _ in range(partition.n_sections)]
    for j, record in enumerate(dataset.records):
        if mode is SectioningMode.RFID_ORACLE:
            section = partition.locate(record.true_position.coordinate(partition.axis))
        else:
            estimate = predict(global_model, record.estimates)
            section = partition.locate(estimate.coordinate(partition.axis), clamp=True)
        members[section].append(j)
    return members


def fit_sectioned(
    dataset: FingerprintDataset,
    partition: SectionPartition,
    penalty: PenaltyFunction,
    cfg: Optional[SolverConfig] = None,
    mode: SectioningMode = SectioningMode.TWO_LEVEL,
) -> SectionedModel:
    """Fit a global model, split the fingerprints into sections and fit each section.

    ``two_level`` assigns a fingerprint to the section containing its global
    prediction; ``rfid_oracle`` uses its true position. Sections left without
    fingerprints, or whose fit fails, fall back to the global model and are
    flagged.

    Raises:
        InvalidInput: If, in rfid_oracle mode, a true position lies outside the partition
    """
    mode = SectioningMode(mode)
    cfg = cfg or SolverConfig()
    global_model = fit_hybrid(dataset, penalty, cfg)
    members = _assign_sections(dataset, partition, global_model, mode)

    models: List[HybridModel] = []
    flags: List[str] = []
    for s, indices in enumerate(members):
        if not indices:
            logger.warning(f"Section {s} has no training fingerprints; using the global model")
            flags.append(f"section{s}:empty")
            models.append(global_model)
            continue
        try:
            model = fit_hybrid(dataset.subset(indices), penalty, cfg)
        except HybridLocError as e:
            logger.warning(f"Section {s} could not be fitted ({e}); using the global model")
            flags.append(f"section{s}:unfittable")
            models.append(global_model)
            continue
        flags.extend(f"section{s}:{flag}" for flag in model.flags if not flag.endswith(":degenerate"))
        models.append(model)

    sizes = tuple(len(indices) for indices in members)
    logger.info(f"Fitted {partition.n_sections} section model(s) in {mode.value} mode, sizes {list(sizes)}")
    return SectionedModel(partition, global_model, tuple(models), mode, sizes, tuple(flags))


def predict_sectioned(
    model: SectionedModel,
    estimates: Sequence[Position],
    rfid_section: Optional[int] = None,
) -> Position:
    """Predict with the model of the section the object is in.

    In two_level mode the section comes from the global prediction (clamped to
    the partition); in rfid_oracle mode it must be supplied.

    Raises:
        InvalidInput: If the section is missing or unknown in rfid_oracle mode
    """
    if model.sectioning_mode is SectioningMode.RFID_ORACLE:
        if rfid_section is None:
            raise InvalidInput("rfid_oracle models need the observed RFID section")
        section = model.partition.check_section(rfid_section)
    else:
        first = predict(model.global_model, estimates)
        section = model.partition.locate(first.coordinate(model.partition.axis), clamp=True)
    return predict(model.per_section_models[section], estimates)


def rfid_midpoint(partition: SectionPartition, section: int) -> Position:
    """Midpoint of a section on the partition axis; other coordinates 0."""
    return Position(0.0).replace(partition.axis, partition.midpoint(section))
