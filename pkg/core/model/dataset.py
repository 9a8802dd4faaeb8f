"""Positions, fingerprint records and the fingerprint CSV format."""
import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from core.errors import InvalidInput

logger = logging.getLogger(__name__)

AXES: Tuple[str, ...] = ("x", "y", "z")


def check_axis(axis: str) -> str:
    """Validate an axis identifier."""
    if axis not in AXES:
        raise InvalidInput(f"Unknown axis {axis!r}, expected one of {AXES}")
    return axis


@dataclass(frozen=True)
class Position:
    """A point in meters."""

    x: float
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self) -> None:
        for axis in AXES:
            value = getattr(self, axis)
            if not math.isfinite(value):
                raise InvalidInput(f"Position.{axis} must be finite, got {value}")
            object.__setattr__(self, axis, float(value))

    def coordinate(self, axis: str) -> float:
        return getattr(self, check_axis(axis))

    def replace(self, axis: str, value: float) -> "Position":
        values = {a: getattr(self, a) for a in AXES}
        values[check_axis(axis)] = value
        return Position(**values)


@dataclass(frozen=True)
class FingerprintRecord:
    """A reference point with its true position and one estimate per technology."""

    point_id: str
    true_position: Position
    estimates: Tuple[Position, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "point_id", str(self.point_id))
        object.__setattr__(self, "estimates", tuple(self.estimates))


@dataclass(frozen=True)
class FingerprintDataset:
    """M fingerprint records, each estimated by the same N technologies."""

    technologies: Tuple[str, ...]
    records: Tuple[FingerprintRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "technologies", tuple(self.technologies))
        object.__setattr__(self, "records", tuple(self.records))
        if not self.technologies:
            raise InvalidInput("Dataset needs at least one technology")
        if len(set(self.technologies)) != len(self.technologies):
            raise InvalidInput(f"Technology names must be unique: {self.technologies}")
        if not self.records:
            raise InvalidInput("Dataset needs at least one fingerprint record")

        seen = set()
        n = len(self.technologies)
        for record in self.records:
            if record.point_id in seen:
                raise InvalidInput(f"Duplicate point_id {record.point_id!r}")
            seen.add(record.point_id)
            if len(record.estimates) != n:
                raise InvalidInput(
                    f"Record {record.point_id!r} has {len(record.estimates)} estimates, expected {n}"
                )

    @property
    def n_technologies(self) -> int:
        return len(self.technologies)

    def __len__(self) -> int:
        return len(self.records)

    def subset(self, indices: Iterable[int]) -> "FingerprintDataset":
        """Dataset restricted to the given record indices (order preserved as given)."""
        return FingerprintDataset(self.technologies, tuple(self.records[i] for i in indices))

    def filter(self, keep) -> Optional["FingerprintDataset"]:
        """Records for which ``keep(record)`` holds, or None if none do."""
        kept = tuple(r for r in self.records if keep(r))
        if not kept:
            return None
        return FingerprintDataset(self.technologies, kept)

    def technology_index(self, name: str) -> int:
        try:
            return self.technologies.index(name)
        except ValueError:
            raise InvalidInput(f"Unknown technology {name!r}; dataset has {self.technologies}") from None


def _fmt(value: float) -> str:
    return repr(float(value))


def csv_header(technologies: Sequence[str]) -> List[str]:
    header = ["point_id", "true_x", "true_y", "true_z"]
    for name in technologies:
        header.extend(f"est_{axis}_{name}" for axis in AXES)
    return header


def write_fingerprint_csv(dataset: FingerprintDataset, path: str) -> None:
    """Write the dataset as fingerprint CSV (UTF-8, LF line endings, full float precision).

    Raises:
        IOError: If the file cannot be written
    """
    out = Path(path)
    try:
        with open(out, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(csv_header(dataset.technologies))
            for record in dataset.records:
                row = [record.point_id] + [_fmt(record.true_position.coordinate(a)) for a in AXES]
                for estimate in record.estimates:
                    row.extend(_fmt(estimate.coordinate(a)) for a in AXES)
                writer.writerow(row)
        logger.info(f"Wrote {len(dataset)} fingerprints x {dataset.n_technologies} technologies to {out}")
    except IOError as e:
        logger.error(f"Failed to write fingerprint CSV {out}: {e}")
        raise


def _technologies_from_header(header: Sequence[str]) -> List[str]:
    if list(header[:4]) != ["point_id", "true_x", "true_y", "true_z"]:
        raise InvalidInput(f"Fingerprint CSV must start with point_id,true_x,true_y,true_z; got {header[:4]}")
    rest = list(header[4:])
    if not rest or len(rest) % 3:
        raise InvalidInput("Fingerprint CSV needs est_x/est_y/est_z columns per technology")

    names = []
    for k in range(0, len(rest), 3):
        triple = rest[k:k + 3]
        name = triple[0][len("est_x_"):]
        if triple != [f"est_{a}_{name}" for a in AXES]:
            raise InvalidInput(f"Malformed estimate columns {triple}")
        names.append(name)
    return names


def read_fingerprint_csv(path: str) -> FingerprintDataset:
    """Read a fingerprint CSV written by :func:`write_fingerprint_csv` or by hand.

    Raises:
        InvalidInput: On a malformed header, non-numeric cell, wrong column count
            or bytes that are not UTF-8
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            try:
                header = next(reader)
            except StopIteration:
                raise InvalidInput(f"Fingerprint CSV {path} is empty") from None
            technologies = _technologies_from_header(header)

            records = []
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise InvalidInput(f"{path}:{line_no}: expected {len(header)} columns, got {len(row)}")
                try:
                    values = [float(v) for v in row[1:]]
                except ValueError as e:
                    raise InvalidInput(f"{path}:{line_no}: {e}") from None
                truth = Position(*values[0:3])
                estimates = tuple(Position(*values[3 + 3 * i:6 + 3 * i]) for i in range(len(technologies)))
                records.append(FingerprintRecord(row[0], truth, estimates))
    except UnicodeDecodeError as e:
        raise InvalidInput(f"Fingerprint CSV {path} is not valid UTF-8: {e}") from None

    dataset = FingerprintDataset(tuple(technologies), tuple(records))
    logger.info(f"Read {len(dataset)} fingerprints for technologies {', '.join(technologies)} from {path}")
    return dataset


def dataset_summary(dataset: FingerprintDataset) -> Dict[str, object]:
    """Small dictionary used for CLI status output."""
    xs = [r.true_position.x for r in dataset.records]
    return {
        "records": len(dataset),
        "technologies": list(dataset.technologies),
        "x_range": (min(xs), max(xs)),
    }
