"""On/off control of the heating pad and the CO2 solenoid valve.

Both actuators use the same law: switch on below ``setpoint - band``, off
above ``setpoint + band``, hold the previous state inside the band, and only
switch once the current state has been held for its minimum dwell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ._kernels import hysteresis_decide
from .plant import InvalidParameterError, _check

MODES = ("auto", "on", "off")


@dataclass(frozen=True)
class ControlConfig:
    t_set: float = 37.0
    t_hyst: float = 0.25
    f_set: float = 0.05
    f_hyst: float = 0.002
    min_dwell_on: float = 2.0
    min_dwell_off: float = 2.0
    # "on"/"off" pin an actuator for open-loop runs
    heater_mode: str = "auto"
    valve_mode: str = "auto"

    def violations(self):
        out = []
        if not (math.isfinite(self.t_set)):
            out.append(("t_set", "must be finite"))
        if not self.t_hyst > 0:
            out.append(("t_hyst", f"must be > 0, got {self.t_hyst!r}"))
        if not self.f_hyst > 0:
            out.append(("f_hyst", f"must be > 0, got {self.f_hyst!r}"))
        elif not (0 < self.f_set - self.f_hyst and self.f_set + self.f_hyst < 1):
            out.append(("f_set", "band f_set +/- f_hyst must lie strictly inside (0, 1)"))
        for name in ("min_dwell_on", "min_dwell_off"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                out.append((name, f"must be >= 0, got {v!r}"))
        for name in ("heater_mode", "valve_mode"):
            if getattr(self, name) not in MODES:
                out.append((name, f"must be one of {MODES}"))
        return out

    def __post_init__(self):
        _check(self.violations())


@dataclass(frozen=True)
class ActuatorState:
    on: bool = False
    last_switch_time: float = -math.inf


def _command(meas, setpoint, band, cfg, st, now):
    if now < st.last_switch_time:
        raise InvalidParameterError(
            f"time went backwards: now={now!r} < last_switch_time={st.last_switch_time!r}"
        )
    on, last = hysteresis_decide(
        float(meas), setpoint, band, bool(st.on), float(st.last_switch_time), float(now),
        cfg.min_dwell_on, cfg.min_dwell_off,
    )
    if on == st.on:
        return st
    return ActuatorState(bool(on), float(last))


def heater_command(t_meas: float, cfg: ControlConfig, st: ActuatorState, now: float) -> ActuatorState:
    return _command(t_meas, cfg.t_set, cfg.t_hyst, cfg, st, now)


def valve_command(f_meas: float, cfg: ControlConfig, st: ActuatorState, now: float) -> ActuatorState:
    """Same law as the heater, applied to the CO2 fraction (on = valve open)."""
    return _command(f_meas, cfg.f_set, cfg.f_hyst, cfg, st, now)
