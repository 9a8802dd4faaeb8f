"""Synthetic fingerprint corridor and error-free RFID section reads.

Randomness: every (technology, grid point) pair owns an independent PCG64
stream, ``default_rng(SeedSequence(rng_seed, spawn_key=(tech, point)))``.
Datasets are therefore reproducible bit for bit and do not depend on the
order in which points are generated.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Tuple

import numpy as np

from core.errors import InvalidInput
from core.fusion.sections import SectionPartition
from core.model.dataset import FingerprintDataset, FingerprintRecord, Position
from engines.rfsim.pathloss import (
    MIN_DISTANCE,
    PRESETS,
    PathLossParams,
    invert_rssi,
    preset,
    simulate_rssi,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorridorConfig:
    """A straight hallway with transmitters at x = 0 and fingerprints on a grid.

    Attributes:
        length: Hallway length in meters
        grid_step: Spacing of fingerprint locations in meters
        technologies: Path-loss model per technology
        rng_seed: Seed of all noise streams
        reads_per_point: RSSI reads averaged per fingerprint before inversion
    """

    length: float = 60.0
    grid_step: float = 0.915
    technologies: Tuple[PathLossParams, ...] = field(default_factory=lambda: tuple(PRESETS.values()))
    rng_seed: int = 7
    reads_per_point: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.grid_step <= self.length:
            raise InvalidInput(f"Need 0 < grid_step <= length, got step {self.grid_step}, length {self.length}")
        if not self.technologies:
            raise InvalidInput("Corridor needs at least one technology")
        if self.reads_per_point < 1:
            raise InvalidInput(f"reads_per_point must be at least 1, got {self.reads_per_point}")
        if self.rng_seed < 0:
            raise InvalidInput(f"rng_seed must be non-negative, got {self.rng_seed}")
        object.__setattr__(self, "technologies", tuple(self.technologies))

    @property
    def max_distance(self) -> float:
        """Upper clamp of inverted distances."""
        return 2.0 * self.length

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "CorridorConfig":
        """Build from a JSON/YAML mapping. Technologies are preset names or full entries."""
        techs: List[PathLossParams] = []
        for entry in values.get("technologies", list(PRESETS)):
            if isinstance(entry, str):
                techs.append(preset(entry))
            elif isinstance(entry, dict):
                techs.append(PathLossParams.from_mapping(entry))
            else:
                raise InvalidInput(f"Technology entry must be a preset name or mapping, got {entry!r}")
        return cls(
            length=float(values.get("length", 60.0)),
            grid_step=float(values.get("grid_step", 0.915)),
            technologies=tuple(techs),
            rng_seed=int(values.get("rng_seed", values.get("seed", 7))),
            reads_per_point=int(values.get("reads_per_point", 1)),
        )

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "length": self.length,
            "grid_step": self.grid_step,
            "technologies": [t.to_mapping() for t in self.technologies],
            "rng_seed": self.rng_seed,
            "reads_per_point": self.reads_per_point,
        }


def scale_noise(cfg: CorridorConfig, factor: float) -> CorridorConfig:
    """Same corridor with every technology's noise sigma multiplied by ``factor``."""
    if factor < 0:
        raise InvalidInput(f"Noise factor must be non-negative, got {factor}")
    techs = tuple(replace(t, noise_sigma=t.noise_sigma * factor) for t in cfg.technologies)
    return replace(cfg, technologies=techs)


def grid_positions(cfg: CorridorConfig) -> np.ndarray:
    """Fingerprint x coordinates 0, step, 2·step, ... ≤ length, first one moved to MIN_DISTANCE."""
    count = int(math.floor(cfg.length / cfg.grid_step + 1e-9)) + 1
    xs = np.arange(count) * cfg.grid_step
    xs[0] = max(xs[0], MIN_DISTANCE)
    return xs


def point_rng(seed: int, technology: int, point: int) -> np.random.Generator:
    """Noise stream of one (technology, grid point) pair."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(technology, point)))


def estimate_distance(
    params: PathLossParams, distance: float, rng: np.random.Generator, reads: int, max_distance: float
) -> float:
    """Invert the mean of ``reads`` simulated RSSI readings."""
    rssi = sum(simulate_rssi(params, distance, rng) for _ in range(reads)) / reads
    return invert_rssi(params, rssi, max_distance)


def generate_corridor_dataset(cfg: CorridorConfig) -> FingerprintDataset:
    """Fingerprints along the x axis with one distance estimate per technology (y = z = 0)."""
    xs = grid_positions(cfg)
    records = []
    for k, x in enumerate(xs):
        estimates = tuple(
            Position(estimate_distance(params, x, point_rng(cfg.rng_seed, i, k), cfg.reads_per_point, cfg.max_distance))
            for i, params in enumerate(cfg.technologies)
        )
        records.append(FingerprintRecord(f"p{k:04d}", Position(float(x)), estimates))

    dataset = FingerprintDataset(tuple(t.name for t in cfg.technologies), tuple(records))
    logger.info(
        f"Simulated {len(records)} fingerprints over {cfg.length} m "
        f"(step {cfg.grid_step} m, seed {cfg.rng_seed}, {len(cfg.technologies)} technologies)"
    )
    return dataset


def observe_rfid_section(partition: SectionPartition, true_position: Position) -> int:
    """Section read from border tags: the section containing the true position.

    Raises:
        InvalidInput: If the position lies outside the partition
    """
    return partition.locate(true_position.coordinate(partition.axis))
