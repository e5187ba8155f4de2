"""Server configuration: key=value file, then AGORA_* environment overrides.

Recognized keys (file form lower-case, environment form upper-case with
the AGORA_ prefix):

    port          = 8765
    data_dir      = ./data
    lookback_days = 90      # advisor recency window
    min_history   = 3       # records below this refuse advice
    period_days   = 365     # prediction period length
    default_seed  = 1       # prediction seed when none requested

Unknown keys are rejected; every numeric value must be positive.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Optional


class ConfigError(Exception):
    pass


@dataclass
class Config:
    port: int = 8765
    data_dir: Path = Path("data")
    lookback_days: int = 90
    min_history: int = 3
    period_days: int = 365
    default_seed: int = 1


_INT_KEYS = {"port", "lookback_days", "min_history", "period_days", "default_seed"}


def _apply(config: Config, key: str, value: str, origin: str) -> None:
    if key == "data_dir":
        config.data_dir = Path(value)
        return
    if key not in _INT_KEYS:
        raise ConfigError(f"unknown configuration key {key!r} ({origin})")
    try:
        number = int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r} ({origin})") from None
    if number <= 0:
        raise ConfigError(f"{key} must be positive, got {number} ({origin})")
    setattr(config, key, number)


def load_config(path: Optional[Path] = None, env: Optional[Mapping[str, str]] = None) -> Config:
    """File first (when given), environment second, so AGORA_* wins."""
    config = Config()
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
            key, _, value = stripped.partition("=")
            _apply(config, key.strip(), value.strip(), f"{path}:{lineno}")
    env = os.environ if env is None else env
    for field in fields(Config):
        env_key = f"AGORA_{field.name.upper()}"
        if env_key in env:
            _apply(config, field.name, env[env_key], env_key)
    return config
