"""Experiment reports: aggregated rows, per-repetition values and CSV output."""
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import InvalidInput

logger = logging.getLogger(__name__)

REPORT_HEADER = ["method", "sections", "metric", "value", "flags"]
REPETITION_HEADER = ["repetition", "method", "sections", "value"]


@dataclass(frozen=True)
class RepetitionValue:
    """Metric of one method in one repetition. NaN when the method had no test points."""

    repetition: int
    method: str
    sections: int
    value: float


@dataclass(frozen=True)
class ReportRow:
    """Mean metric of one method across repetitions.

    ``method`` carries a ``@x<=R`` suffix for rows restricted to test points
    whose true coordinate is at most R. ``alpha`` holds the x-axis weights of
    the final repetition (per section for sectioned methods).
    """

    method: str
    sections: int
    metric: str
    value: float
    flags: Tuple[str, ...] = ()
    alpha: Tuple[Tuple[float, ...], ...] = ()
    samples: int = 0


@dataclass
class EvalReport:
    metric: str
    rows: List[ReportRow] = field(default_factory=list)
    repetitions: List[RepetitionValue] = field(default_factory=list)

    def row(self, method: str, sections: Optional[int] = None) -> ReportRow:
        """Row of ``method``; ``sections`` is needed only when several S were run.

        Raises:
            InvalidInput: If no row, or more than one, matches
        """
        matches = [r for r in self.rows if r.method == method and (sections is None or r.sections == sections)]
        if len(matches) != 1:
            raise InvalidInput(f"{len(matches)} report rows match method={method!r} sections={sections}")
        return matches[0]

    def value(self, method: str, sections: Optional[int] = None) -> float:
        return self.row(method, sections).value

    def improvement(
        self,
        method: str,
        baseline: str,
        sections: Optional[int] = None,
        baseline_sections: Optional[int] = None,
    ) -> float:
        """Percentage by which ``method`` lowers the metric relative to ``baseline``."""
        base = self.value(baseline, baseline_sections)
        if base == 0.0:
            return 0.0
        return 100.0 * (base - self.value(method, sections)) / base

    def values(self, method: str, sections: Optional[int] = None) -> np.ndarray:
        """Per-repetition values of one method, in repetition order."""
        picked = [
            v for v in self.repetitions if v.method == method and (sections is None or v.sections == sections)
        ]
        picked.sort(key=lambda v: v.repetition)
        return np.array([v.value for v in picked])

    def win_fraction(self, method: str, against: Sequence[str], sections: Optional[int] = None) -> float:
        """Share of repetitions in which ``method`` beats every method in ``against``."""
        mine = self.values(method, sections)
        if mine.size == 0:
            raise InvalidInput(f"No repetition values for {method!r}")
        best_other = np.min(np.vstack([self.values(name) for name in against]), axis=0)
        return float(np.mean(mine < best_other))


def aggregate(metric: str, repetitions: List[RepetitionValue], details: Dict[Tuple[str, int], dict]) -> EvalReport:
    """Average repetition values per (method, sections), ignoring NaN entries.

    ``details`` maps each key to the ``flags`` and ``alpha`` of its final repetition.
    """
    grouped: Dict[Tuple[str, int], List[float]] = {}
    for v in repetitions:
        grouped.setdefault((v.method, v.sections), []).append(v.value)

    rows = []
    for (method, sections), values in grouped.items():
        finite = [x for x in values if not math.isnan(x)]
        mean = float(np.mean(finite)) if finite else math.nan
        extra = details.get((method, sections), {})
        rows.append(
            ReportRow(
                method,
                sections,
                metric,
                mean,
                tuple(extra.get("flags", ())),
                tuple(extra.get("alpha", ())),
                len(finite),
            )
        )
    return EvalReport(metric, rows, list(repetitions))


def repetitions_path(path: str) -> Path:
    """Companion file of a report: ``report.csv`` -> ``report.repetitions.csv``."""
    out = Path(path)
    return out.with_name(f"{out.stem}.repetitions{out.suffix or '.csv'}")


def write_report(report: EvalReport, path: str) -> None:
    """Write ``method,sections,metric,value,flags`` rows plus the per-repetition companion CSV.

    Raises:
        IOError: If a file cannot be written
    """
    out = Path(path)
    companion = repetitions_path(path)
    try:
        logger.info(f"Writing report to {out}")
        with open(out, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(REPORT_HEADER)
            for row in report.rows:
                writer.writerow([row.method, row.sections, row.metric, repr(row.value), ";".join(row.flags)])

        with open(companion, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(REPETITION_HEADER)
            for v in report.repetitions:
                writer.writerow([v.repetition, v.method, v.sections, repr(v.value)])
        logger.info(f"Report written successfully to {out} ({len(report.repetitions)} repetition values in {companion})")
    except IOError as e:
        logger.error(f"Failed to write report: {e}")
        raise


def read_report(path: str) -> EvalReport:
    """Read a report CSV written by :func:`write_report` (companion file optional)."""
    rows = []
    metric = ""
    with open(path, "r", encoding="utf-8", newline="") as f:
        for entry in csv.DictReader(f):
            metric = entry["metric"]
            flags = tuple(x for x in entry["flags"].split(";") if x)
            rows.append(ReportRow(entry["method"], int(entry["sections"]), metric, float(entry["value"]), flags))

    repetitions = []
    companion = repetitions_path(path)
    if companion.exists():
        with open(companion, "r", encoding="utf-8", newline="") as f:
            for entry in csv.DictReader(f):
                repetitions.append(
                    RepetitionValue(int(entry["repetition"]), entry["method"], int(entry["sections"]), float(entry["value"]))
                )
    return EvalReport(metric, rows, repetitions)
