"""Configuration management for hybridloc."""
import os
import warnings
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from core.errors import InvalidInput


class Config:
    """Configuration manager for hybridloc."""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize configuration.

        Args:
            config_path: Optional path to config file. If not provided, looks for
                        hybridloc.yaml in the current directory.
        """
        self.config_path = config_path or self._find_config()
        self._config: Dict[str, Any] = self._load_config()

    def _find_config(self) -> Optional[str]:
        """Find configuration file in common locations."""
        current_dir = Path.cwd()
        possible_paths = [
            current_dir / "hybridloc.yaml",
            current_dir / "hybridloc.yml",
            current_dir / ".hybridloc.yaml",
        ]

        for path in possible_paths:
            if path.exists():
                return str(path)
        return None

    @staticmethod
    def defaults() -> Dict[str, Any]:
        """Built-in defaults, overridden key by key by the config file."""
        return {
            "penalty": "p2",
            "solver": {
                "beta": "auto",
                "eps_opt": 1e-10,
                "max_iter": None,
                "iteration_ceiling": 10_000_000,
            },
            "simulation": {
                "length": 60.0,
                "grid_step": 0.915,
                "rng_seed": 7,
                "reads_per_point": 1,
                "technologies": ["ble", "wifi", "zigbee"],
            },
            "experiment": {
                "split_fraction": 0.7,
                "repetitions": 1000,
                "metric": "mse",
                "distance_ranges": [20.0, 40.0, 60.0],
                "workers": 1,
            },
            "logging": {
                "level": os.getenv("LOG_LEVEL", "INFO"),
                "format": "rich",
            },
        }

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from file or use defaults."""
        default_config = self.defaults()

        if self.config_path and Path(self.config_path).exists():
            try:
                file_config = load_mapping(self.config_path)
                return self.deep_merge(default_config, file_config)
            except (OSError, InvalidInput) as e:
                # Logging is not configured yet at this point
                warnings.warn(f"Failed to load config file {self.config_path}: {e}. Using defaults.", UserWarning)
                return default_config

        return default_config

    @staticmethod
    def deep_merge(base: Dict, override: Dict) -> Dict:
        """Deep merge two dictionaries."""
        result = base.copy()
        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = Config.deep_merge(result[key], value)
            else:
                result[key] = value
        return result

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value using dot notation."""
        value: Any = self._config
        for k in key.split("."):
            if not isinstance(value, dict):
                return default
            value = value.get(k)
            if value is None:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """Set configuration value using dot notation."""
        keys = key.split(".")
        config = self._config
        for k in keys[:-1]:
            config = config.setdefault(k, {})
        config[keys[-1]] = value

    def section(self, key: str) -> Dict[str, Any]:
        """Return a copy of a nested mapping, empty if absent."""
        value = self.get(key, {})
        return dict(value) if isinstance(value, dict) else {}

    def __getitem__(self, key: str) -> Any:
        """Allow dictionary-style access."""
        return self.get(key)


def load_mapping(path: str) -> Dict[str, Any]:
    """Read a JSON or YAML file holding a mapping.

    JSON is parsed by the YAML loader as well, so simulator and experiment
    configs may use either format.

    Raises:
        InvalidInput: If the file is not UTF-8 YAML or the document is not a mapping.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except (yaml.YAMLError, UnicodeDecodeError) as e:
        raise InvalidInput(f"Config file {path} could not be parsed: {e}") from None
    if not isinstance(data, dict):
        raise InvalidInput(f"Config file {path} must contain a mapping, got {type(data).__name__}")
    return data
