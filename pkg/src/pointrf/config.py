"""``key = value`` configuration text and its mapping onto the config dataclasses."""

import dataclasses
from pathlib import Path

from .errors import ConfigurationError


def parse_config_text(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        out[key.strip()] = value.strip()
    return out


def load_config_file(path):
    try:
        return parse_config_text(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc


def _coerce(value, like, name):
    if not isinstance(value, str):
        return value
    try:
        if isinstance(like, bool):
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if isinstance(like, int):
            return int(value)
        if isinstance(like, float):
            return float(value)
        if isinstance(like, tuple):
            return tuple(float(v) for v in value.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {name}: {value!r}") from exc
    if like is None:
        try:
            return int(value)
        except ValueError:
            return value
    return value


def apply(config, values):
    """Return a copy of ``config`` with matching fields replaced; unknown keys are ignored."""
    names = {f.name for f in dataclasses.fields(config)}
    changes = {}
    for key, value in values.items():
        if key in names and value is not None:
            changes[key] = _coerce(value, getattr(config, key), key)
    return dataclasses.replace(config, **changes)


def snapshot(*configs, prefix=True):
    """Flatten dataclass configs into one ``{key: str}`` dict for storage."""
    out = {}
    for cfg in configs:
        tag = type(cfg).__name__.lower().replace("config", "")
        for f in dataclasses.fields(cfg):
            value = getattr(cfg, f.name)
            if isinstance(value, tuple):
                value = " ".join(repr(v) for v in value)
            out[f"{tag}.{f.name}" if prefix else f.name] = str(value)
    return out
