"""Settings for network_subsidies.

Defaults ship in ``config/defaults.yaml`` next to this module. A second YAML
file named by ``NETWORK_SUBSIDIES_CONFIG`` (or passed explicitly) overrides
individual keys.
"""
from __future__ import annotations

import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from network_subsidies.errors import ConfigError

DEFAULTS_PATH = Path(__file__).parent / "config" / "defaults.yaml"
ENV_VAR = "NETWORK_SUBSIDIES_CONFIG"


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    tolerance: float = Field(1e-9, ge=0)
    rowgen_iteration_factor: float = Field(10, gt=0)
    max_dynamics_rounds: int = Field(1000, ge=1)
    enumeration_cap: int = Field(1_000_000, ge=1)
    integral_cap: int = Field(24, ge=0)
    grid_cap: int = Field(2_000_000, ge=1)
    grid_denominator: int = Field(12, ge=1, le=12)
    sat_heavy_weight: int = Field(1_000_000, ge=1)
    e_hat: str = "2718281828459045/1000000000000000"
    decimal_digits: int = Field(12, ge=1)
    log_level: str = "WARNING"

    @field_validator("e_hat")
    @classmethod
    def _e_hat_is_rational(cls, value: str) -> str:
        try:
            Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"e_hat must be a rational literal, got {value!r}") from exc
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return level

    @property
    def e_hat_value(self) -> Fraction:
        return Fraction(self.e_hat)


def _flatten(raw: Dict[str, Any]) -> Dict[str, Any]:
    # sections in the YAML file are only for readability
    flat: Dict[str, Any] = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read settings file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"settings file {path} must contain a mapping")
    return _flatten(data)


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    """Load the default settings and apply an optional override file.

    Args:
        path: override file. When omitted, the ``NETWORK_SUBSIDIES_CONFIG``
            environment variable is consulted.

    Raises:
        ConfigError: if a file cannot be parsed or a value is invalid.
    """
    values = _read_yaml(DEFAULTS_PATH)
    override = path or os.getenv(ENV_VAR)
    if override:
        values.update(_read_yaml(Path(override)))
    try:
        return Settings(**values)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
