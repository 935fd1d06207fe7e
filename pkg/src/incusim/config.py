"""INI-style experiment configs.

Sections: ``thermal``, ``gas``, ``control``, ``sensor_temp``, ``sensor_co2``,
``gate``, ``sim`` and ``events``. Every key is optional (defaults fill the
gaps) but unknown sections or keys are rejected. Each entry under
``[events]`` is one disturbance::

    [events]
    warm_room = ambient_change time=120 new_t_ambient=26
    door = door_open time=300 duration=20 h_multiplier=4 gas_mix_rate=0.05
    tank_low = supply_drop time=400 flow_multiplier=0.5
"""
from __future__ import annotations

import configparser
import dataclasses
from importlib import resources

from .engine import EVENT_TYPES, SECTIONS, SIM_KEYS, ConfigError, SimConfig
from .plant import InvalidParameterError

_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def default_config_text() -> str:
    return resources.files("incusim").joinpath("data/default.ini").read_text(encoding="utf-8")


def _convert(raw, current, key):
    if isinstance(current, bool):
        v = _BOOL.get(raw.strip().lower())
        if v is None:
            raise ValueError(f"{key}: expected a boolean, got {raw!r}")
        return v
    if isinstance(current, str):
        return raw.strip()
    if isinstance(current, int):
        try:
            return int(raw.strip(), 0)
        except ValueError:
            raise ValueError(f"{key}: expected an integer, got {raw!r}") from None
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{key}: expected a number, got {raw!r}") from None


def _parse_event(name, text, violations):
    kind, *pairs = text.split()
    cls = EVENT_TYPES.get(kind)
    prefix = f"events.{name}"
    if cls is None:
        violations.append((prefix, f"unknown event kind {kind!r} (expected one of {sorted(EVENT_TYPES)})"))
        return None
    wanted = [f.name for f in dataclasses.fields(cls)]
    kwargs = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or key not in wanted:
            violations.append((f"{prefix}.{key}", "unknown event parameter"))
            continue
        try:
            kwargs[key] = float(value)
        except ValueError:
            violations.append((f"{prefix}.{key}", f"expected a number, got {value!r}"))
    missing = [k for k in wanted if k not in kwargs]
    if missing:
        violations.append((prefix, f"missing parameters: {', '.join(missing)}"))
        return None
    event = cls(**kwargs)
    violations.extend((f"{prefix}.{k}", m) for k, m in event.violations())
    return event


def parse_config(text: str, overrides=None) -> SimConfig:
    """Build a validated SimConfig from INI text.

    ``overrides`` maps ``section.key`` to already-typed values and wins over
    the file. Raises ConfigError listing every violation found.
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([("config", f"malformed file: {exc}")]) from None

    base = SimConfig()
    violations = []
    kwargs = {}
    known = set(SECTIONS) | {"sim", "events"}
    for section in parser.sections():
        if section not in known:
            violations.append((section, "unknown section"))

    for section, attr in SECTIONS.items():
        default = getattr(base, attr)
        names = {f.name for f in dataclasses.fields(default)}
        values = {}
        if parser.has_section(section):
            for key, raw in parser.items(section):
                if key not in names:
                    violations.append((f"{section}.{key}", "unknown key"))
                    continue
                try:
                    values[key] = _convert(raw, getattr(default, key), f"{section}.{key}")
                except ValueError as exc:
                    violations.append((f"{section}.{key}", str(exc).split(": ", 1)[-1]))
        for path, value in (overrides or {}).items():
            sec, _, key = path.partition(".")
            if sec == section:
                values[key] = value
        try:
            kwargs[attr] = dataclasses.replace(default, **values)
        except InvalidParameterError as exc:
            violations.extend((f"{section}.{k}", m) for k, m in exc.violations)

    sim = {}
    if parser.has_section("sim"):
        for key, raw in parser.items("sim"):
            if key not in SIM_KEYS:
                violations.append((f"sim.{key}", "unknown key"))
                continue
            try:
                sim[key] = _convert(raw, getattr(base, key), f"sim.{key}")
            except ValueError as exc:
                violations.append((f"sim.{key}", str(exc).split(": ", 1)[-1]))
    for path, value in (overrides or {}).items():
        sec, _, key = path.partition(".")
        if sec == "sim":
            sim[key] = value

    events = []
    if parser.has_section("events"):
        for name, raw in parser.items("events"):
            ev = _parse_event(name, raw, violations)
            if ev is not None:
                events.append(ev)

    if violations:
        # still report cross-field problems using defaults for broken sections
        kwargs = {a: kwargs.get(a, getattr(base, a)) for a in SECTIONS.values()}
    try:
        cfg = SimConfig(**kwargs, **sim, events=tuple(events))
    except ConfigError as exc:
        violations.extend(exc.violations)
        cfg = None
    if violations:
        raise ConfigError(violations)
    return cfg


def load_config(path=None, overrides=None) -> SimConfig:
    """Read a config file; ``None`` loads the packaged defaults.

    Raises OSError when the file cannot be read and ConfigError when invalid.
    """
    if path is None:
        text = default_config_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_config(text, overrides)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg: SimConfig) -> str:
    """Fully resolved INI text; ``parse_config(dump_config(c)) == c``."""
    lines = []
    for section, attr in SECTIONS.items():
        lines.append(f"[{section}]")
        obj = getattr(cfg, attr)
        for f in dataclasses.fields(obj):
            lines.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
        lines.append("")
    lines.append("[sim]")
    for key in SIM_KEYS:
        lines.append(f"{key} = {_fmt(getattr(cfg, key))}")
    lines.append("")
    lines.append("[events]")
    for i, ev in enumerate(cfg.events):
        params = " ".join(f"{f.name}={_fmt(getattr(ev, f.name))}" for f in dataclasses.fields(ev))
        lines.append(f"event{i} = {ev.kind} {params}")
    return "\n".join(lines) + "\n"
