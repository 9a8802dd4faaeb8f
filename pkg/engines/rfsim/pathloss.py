"""Log-distance path loss: RSSI generation, inversion and calibration."""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np

from core.errors import DegenerateInput, InvalidInput

logger = logging.getLogger(__name__)

# Distances below this are clamped before taking the logarithm (meters)
MIN_DISTANCE = 0.1


@dataclass(frozen=True)
class PathLossParams:
    """rssi(d) = rssi_at_1m - 10 n log10(d) + N(0, σ²) for one technology."""

    name: str
    rssi_at_1m: float
    exponent_n: float
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if not self.exponent_n > 0:
            raise InvalidInput(f"{self.name}: path-loss exponent must be positive, got {self.exponent_n}")
        if not self.noise_sigma >= 0:
            raise InvalidInput(f"{self.name}: noise sigma must be non-negative, got {self.noise_sigma}")
        if not math.isfinite(self.rssi_at_1m):
            raise InvalidInput(f"{self.name}: rssi_at_1m must be finite")

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "PathLossParams":
        try:
            return cls(
                name=str(values["name"]),
                rssi_at_1m=float(values["rssi_at_1m"]),
                exponent_n=float(values["exponent_n"]),
                noise_sigma=float(values.get("noise_sigma", 0.0)),
            )
        except KeyError as e:
            raise InvalidInput(f"Technology entry is missing {e}") from None

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "rssi_at_1m": self.rssi_at_1m,
            "exponent_n": self.exponent_n,
            "noise_sigma": self.noise_sigma,
        }


# Synthetic placeholders with WiFi strongest at 1 m; not measured values
PRESETS: Dict[str, PathLossParams] = {
    "ble": PathLossParams("ble", -46.0, 2.2, 4.0),
    "wifi": PathLossParams("wifi", -38.0, 2.0, 3.0),
    "zigbee": PathLossParams("zigbee", -44.0, 2.1, 3.5),
}


def preset(name: str) -> PathLossParams:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise InvalidInput(f"Unknown technology preset {name!r}; known: {sorted(PRESETS)}") from None


def mean_rssi(params: PathLossParams, distance: float) -> float:
    """Noise-free RSSI at ``distance``."""
    d = max(float(distance), MIN_DISTANCE)
    return params.rssi_at_1m - 10.0 * params.exponent_n * math.log10(d)


def simulate_rssi(params: PathLossParams, distance: float, rng: np.random.Generator) -> float:
    """One RSSI reading in dBm.

    Exactly one standard normal is drawn per call, also when σ = 0, so a
    generator produces the same stream whatever the noise level.
    """
    return mean_rssi(params, distance) + params.noise_sigma * float(rng.standard_normal())


def invert_rssi(params: PathLossParams, rssi: float, max_distance: Optional[float] = None) -> float:
    """Distance whose noise-free RSSI equals ``rssi``, clamped to [0, max_distance]."""
    d = 10.0 ** ((params.rssi_at_1m - rssi) / (10.0 * params.exponent_n))
    if max_distance is not None:
        d = min(d, max_distance)
    return max(d, 0.0)


def fit_path_loss(samples: Iterable[Tuple[float, float]], name: str = "fitted") -> PathLossParams:
    """Least-squares fit of rssi_at_1m and exponent_n on log10 distance.

    ``noise_sigma`` is the standard deviation of the regression residuals.

    Raises:
        InvalidInput: If fewer than two samples are given
        DegenerateInput: If all samples share one distance
    """
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
        raise InvalidInput("Path-loss calibration needs at least two (distance, rssi) samples")

    x = np.log10(np.maximum(data[:, 0], MIN_DISTANCE))
    y = data[:, 1]
    if np.ptp(x) == 0.0:
        raise DegenerateInput("Path-loss calibration needs at least two distinct distances")

    design = np.column_stack([np.ones_like(x), x])
    (intercept, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - (intercept + slope * x)
    params = PathLossParams(name, float(intercept), float(-slope / 10.0), float(np.std(residuals)))
    logger.debug(
        f"Calibrated {name}: rssi_at_1m={params.rssi_at_1m:.3f} n={params.exponent_n:.3f} "
        f"sigma={params.noise_sigma:.3f} from {len(y)} samples"
    )
    return params
