"""
settings.py – resource limits from config.yaml, PQW_LIMITS and --limits.

Precedence, lowest first: built-in defaults, the first config.yaml found on
the search path, limits given in a specification file, the PQW_LIMITS
environment variable, the CLI --limits string.  Both strings use the same syntax:

    max-cosets=500000,max-relators=200000
"""

from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass

import yaml

log = logging.getLogger("pqw.settings")

_HERE = os.path.dirname(os.path.abspath(__file__))
REPO_ROOT = os.path.normpath(os.path.join(_HERE, "..", ".."))

_CONFIG_SEARCH = [
    os.path.join(REPO_ROOT, "config.yaml"),
    os.path.expanduser("~/.config/pqw/config.yaml"),
]

ENV_LIMITS = "PQW_LIMITS"
ENV_CONFIG = "PQW_CONFIG"


class SettingsError(ValueError):
    """Unknown limit key or a non-positive / non-integer value."""


@dataclass(frozen=True)
class Limits:
    max_cosets: int = 2_000_000
    max_deductions: int = 50_000_000
    max_relators: int = 1_000_000
    census_budget: int = 10_000_000
    max_group_order: int = 1_000_000
    max_substitution_length: int = 12
    max_relator_length: int = 400

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise SettingsError(f"{f.name.replace('_', '-')} must be a positive integer, got {v!r}")

    def override(self, **values) -> "Limits":
        return dataclasses.replace(self, **values)

    def as_dict(self) -> dict:
        return {f.name.replace("_", "-"): getattr(self, f.name) for f in dataclasses.fields(self)}


_FIELDS = {f.name for f in dataclasses.fields(Limits)}


def parse_limits(text: str) -> dict:
    """'max-cosets=500000,max-relators=200000' → {'max_cosets': 500000, ...}"""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        name = key.strip().replace("-", "_")
        if not sep or name not in _FIELDS:
            raise SettingsError(f"unknown limit {key.strip()!r} (known: "
                                f"{', '.join(sorted(k.replace('_', '-') for k in _FIELDS))})")
        try:
            out[name] = int(value.strip().replace("_", ""))
        except ValueError:
            raise SettingsError(f"limit {key.strip()} needs an integer, got {value.strip()!r}") from None
    return out


def load_config(path: str | None = None, environ=os.environ) -> dict:
    """First config.yaml on the search path, parsed; {} when there is none."""
    candidates = [path] if path else ([environ[ENV_CONFIG]] if environ.get(ENV_CONFIG) else []) + _CONFIG_SEARCH
    for candidate in candidates:
        if candidate and os.path.exists(candidate):
            with open(candidate) as f:
                cfg = yaml.safe_load(f) or {}
            log.debug(f"config loaded from {candidate}")
            return cfg
    else:
        if path:
            raise SettingsError(f"config file not found: {path}")
        log.debug("no config.yaml found, using built-in limits")
        return {}


def limits_from_config(cfg: dict) -> dict:
    values = {}
    for section in ("limits", "simplify"):
        for key, value in (cfg.get(section) or {}).items():
            name = str(key).replace("-", "_")
            if name not in _FIELDS:
                raise SettingsError(f"unknown key {section}.{key} in config.yaml")
            values[name] = value
    return values


def load_limits(cli_text: str | None = None, environ=os.environ, config_path: str | None = None,
                document: dict | None = None) -> Limits:
    """document holds limits from a specification file; they sit between config.yaml and PQW_LIMITS."""
    values = limits_from_config(load_config(config_path, environ))
    values.update(document or {})
    if environ.get(ENV_LIMITS):
        values.update(parse_limits(environ[ENV_LIMITS]))
    if cli_text:
        values.update(parse_limits(cli_text))
    limits = Limits(**values)
    log.debug(f"limits: {limits.as_dict()}")
    return limits
