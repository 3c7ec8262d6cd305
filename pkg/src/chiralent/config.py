"""INI run configuration: one section per command plus [global], flags override file values."""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError

DEFAULTS: dict[str, dict[str, object]] = {
    "global": {"seed": 0, "out": "runs"},
    "generate": {"scale": 0.3, "feature_set": "CORE8", "grid": "", "full_scale": False},
    "train": {"dataset": "", "kind": "RandomForest", "poly2": True, "n_trees": 500, "max_depth": "",
              "features_per_split": "sqrt", "lam1": 1e-4, "lam2": 0.0},
    "eval": {"dataset": "", "model": ""},
    "certify": {"state_json": "", "family": "tiles", "params": "0.0", "terms": 20, "restarts": 10,
                "steps": 500, "paper_budget": False},
    "calibrate": {"raw": "", "repeats": 4, "scheme": "per_circuit"},
    "reproduce": {"scale": 0.2, "n_trees": 500, "n_states": 10_000},
}


def _coerce(value: str, default, key: str):
    if isinstance(default, bool):
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    try:
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {value!r} as {type(default).__name__}") from exc
    return value


def load(path: str | None, command: str, overrides: dict | None = None) -> dict:
    """Merged settings for ``command``: defaults < [global] < [command] < overrides."""
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command section {command!r}")
    cp = configparser.ConfigParser()
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
        unknown = [s for s in cp.sections() if s not in DEFAULTS]
        if unknown:
            raise ConfigError(f"unknown config sections: {unknown}")
    merged: dict = {}
    for section in ("global", command):
        defaults = DEFAULTS[section]
        merged.update(defaults)
        if cp.has_section(section):
            for key, raw in cp.items(section):
                if key not in defaults:
                    raise ConfigError(f"[{section}] unknown key {key!r}")
                merged[key] = _coerce(raw, defaults[key], f"[{section}] {key}")
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in merged:
            raise ConfigError(f"unknown setting {key!r} for {command}")
        merged[key] = val
    return merged
