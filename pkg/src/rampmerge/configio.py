"""Flat key-value scenario configuration files.

Format: one `dotted.section.key = value` pair per line, `#` comments,
blank lines ignored.  Chosen over nested formats so experiment configs
diff cleanly.  Every emitted config echoes the full effective
configuration and parses back to an identical in-memory value.
"""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import replace

from .baselines import APFGains
from .decision import DecisionConfig
from .errors import ValidationError
from .planner import LossWeights, SamplingGrid
from .simulator import ScenarioConfig
from .vehicle import IdmParams, VehicleParams

_SECTION_TYPES = {
    "decision": DecisionConfig,
    "grid": SamplingGrid,
    "weights": LossWeights,
    "vehicle": VehicleParams,
    "idm": IdmParams,
    "apf": APFGains,
}


def _scalar_fields(cls) -> dict[str, type]:
    hints = typing.get_type_hints(cls)
    out = {}
    for f in dataclasses.fields(cls):
        t = hints[f.name]
        if t in (float, int, bool, str):
            out[f.name] = t
    return out


def _known_keys() -> dict[str, tuple[str, str, type]]:
    """dotted key -> (section attr on ScenarioConfig, field name, type)."""
    keys = {}
    for name, t in _scalar_fields(ScenarioConfig).items():
        keys[f"scenario.{name}"] = ("", name, t)
    for section, cls in _SECTION_TYPES.items():
        for name, t in _scalar_fields(cls).items():
            keys[f"{section}.{name}"] = (section, name, t)
    return keys


_KEYS = _known_keys()


def _parse_value(raw: str, typ: type, key: str, line_no: int):
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ValidationError(f"line {line_no}: bad value for {key}: {exc}")


def parse_config_text(text: str) -> dict[str, object]:
    """Parse to {dotted key: typed value}; diagnostics carry line numbers."""
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"line {line_no}: expected 'key = value', "
                                  f"got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _KEYS:
            raise ValidationError(f"line {line_no}: unknown key {key!r}")
        _, _, typ = _KEYS[key]
        values[key] = _parse_value(raw, typ, key, line_no)
    return values


def scenario_from_text(text: str) -> ScenarioConfig:
    """Defaults overridden by the keys present in `text`."""
    values = parse_config_text(text)
    per_section: dict[str, dict] = {"": {}}
    for section in _SECTION_TYPES:
        per_section[section] = {}
    for key, value in values.items():
        section, name, _ = _KEYS[key]
        per_section[section][name] = value

    kwargs = dict(per_section[""])
    for section, cls in _SECTION_TYPES.items():
        if per_section[section]:
            kwargs[section] = replace(cls(), **per_section[section])
    return ScenarioConfig(**kwargs)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def scenario_to_text(cfg: ScenarioConfig) -> str:
    """Full config echo, one sorted key per line; round-trips exactly."""
    lines = []
    for key in sorted(_KEYS):
        section, name, _ = _KEYS[key]
        holder = cfg if section == "" else getattr(cfg, section)
        lines.append(f"{key} = {_format_value(getattr(holder, name))}")
    return "\n".join(lines) + "\n"


def apply_override(cfg: ScenarioConfig, key: str, value: float) -> ScenarioConfig:
    """Set one (possibly bare) scenario key to a numeric value."""
    dotted = key if "." in key else f"scenario.{key}"
    if dotted not in _KEYS:
        raise ValidationError(f"unknown sweep parameter {key!r}")
    section, name, typ = _KEYS[dotted]
    typed = typ(value)
    if section == "":
        return replace(cfg, **{name: typed})
    return replace(cfg, **{section: replace(getattr(cfg, section),
                                            **{name: typed})})
