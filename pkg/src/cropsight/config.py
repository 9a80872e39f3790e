"""Pipeline configuration with file and environment overrides.

Precedence, highest first: explicit command-line flags, then a JSON config
file (given via --config or the CROPSIGHT_CONFIG environment variable), then
the package defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .bands import DEFAULT_BANDS, DEFAULT_WINDOW, BandAssignment
from .errors import ConfigError
from .groundtruth import DEFAULT_CLASSES, DEFAULT_THRESHOLD, ClassMap, load_classmap

CONFIG_ENV_VAR = "CROPSIGHT_CONFIG"

_CONFIG_KEYS = frozenset({"bands", "threshold", "tile_size", "classmap", "window", "threads"})
_BAND_KEYS = frozenset({"nir", "red", "green", "blue", "reflectance_scale"})


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved knobs shared by the command-line pipeline stages."""

    bands: BandAssignment = DEFAULT_BANDS
    threshold: float = DEFAULT_THRESHOLD
    tile_size: int = 256
    classmap: Path | None = None
    window: tuple[float, float] = DEFAULT_WINDOW
    threads: int | None = None

    def __post_init__(self) -> None:
        if not -2.0 < self.threshold < 2.0:
            raise ConfigError(f"threshold must lie in (-2, 2), got {self.threshold}")
        if self.tile_size < 16:
            raise ConfigError(f"tile size must be at least 16, got {self.tile_size}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        lo, hi = self.window
        if not lo < hi:
            raise ConfigError(f"window must satisfy low < high, got ({lo}, {hi})")

    def classes(self) -> ClassMap:
        if self.classmap is None:
            return DEFAULT_CLASSES
        return load_classmap(self.classmap)


def load_config_file(path: str | Path) -> dict:
    """Read and shape-check a JSON config file; returns plain override values."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such config file: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")
    if "bands" in data:
        bands = data["bands"]
        if not isinstance(bands, dict):
            raise ConfigError(f"{path}: bands must be an object with band-name keys")
        bad = set(bands) - _BAND_KEYS
        if bad:
            raise ConfigError(f"{path}: unknown band keys: {', '.join(sorted(bad))}")
    if "window" in data:
        window = data["window"]
        if not isinstance(window, (list, tuple)) or len(window) != 2:
            raise ConfigError(f"{path}: window must be a [low, high] pair")
    return data


def resolve_config(
    config_path: str | Path | None = None,
    overrides: dict | None = None,
    env: dict | None = None,
) -> PipelineConfig:
    """Merge defaults, an optional config file, and explicit overrides.

    `config_path` falls back to the CROPSIGHT_CONFIG environment variable.
    `overrides` holds already-typed values from command-line flags; entries
    that are None are treated as unset.
    """
    if env is None:
        env = os.environ
    if config_path is None:
        env_path = env.get(CONFIG_ENV_VAR, "")
        config_path = env_path or None

    merged: dict = {}
    if config_path is not None:
        merged.update(load_config_file(config_path))
    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config override: {key}")
            merged[key] = value

    kwargs: dict = {}
    if "bands" in merged:
        value = merged["bands"]
        if isinstance(value, BandAssignment):
            kwargs["bands"] = value
        else:
            try:
                kwargs["bands"] = BandAssignment(**{k: v for k, v in value.items()})
            except TypeError as exc:
                raise ConfigError(f"bad band assignment: {exc}") from None
    if "threshold" in merged:
        kwargs["threshold"] = float(merged["threshold"])
    if "tile_size" in merged:
        kwargs["tile_size"] = int(merged["tile_size"])
    if "classmap" in merged and merged["classmap"] is not None:
        kwargs["classmap"] = Path(merged["classmap"])
    if "window" in merged:
        lo, hi = merged["window"]
        kwargs["window"] = (float(lo), float(hi))
    if "threads" in merged and merged["threads"] is not None:
        kwargs["threads"] = int(merged["threads"])
    return PipelineConfig(**kwargs)
