"""Imaging gate: allow a capture only after the chamber has held its setpoints."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .plant import InvalidParameterError, _check

# slack for float times built as k*dt
_EPS = 1e-9


class Reason(str, Enum):
    OK = "ok"
    TEMP = "temp_out_of_tolerance"
    CO2 = "co2_out_of_tolerance"
    HISTORY = "insufficient_history"


@dataclass(frozen=True)
class GatePolicy:
    tol_t: float = 0.5
    tol_f: float = 0.005
    hold: float = 30.0
    capture_interval: float = 300.0
    # gate on sensor readings instead of the true plant state
    use_measured: bool = False

    def violations(self):
        out = []
        for name in ("tol_t", "tol_f", "capture_interval"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                out.append((name, f"must be > 0, got {v!r}"))
        if not (math.isfinite(self.hold) and self.hold >= 0):
            out.append(("hold", f"must be >= 0, got {self.hold!r}"))
        return out

    def __post_init__(self):
        _check(self.violations())


@dataclass(frozen=True)
class CaptureEvent:
    time: float
    permitted: bool
    reason: Reason


def _columns(history, policy):
    if policy.use_measured:
        return history.t, history.t_meas, history.f_meas
    return history.t, history.t_true, history.f_true


def _check_sorted(t):
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise InvalidParameterError("telemetry history must be strictly increasing in time")


def _gate(t, temp, frac, policy, setpoints, at):
    t_set, f_set = setpoints
    start = at - policy.hold
    scale = _EPS * max(1.0, abs(at))
    if t.size == 0 or t[0] > start + scale or t[-1] < at - scale:
        return CaptureEvent(at, False, Reason.HISTORY)
    lo = np.searchsorted(t, start - scale, side="left")
    hi = np.searchsorted(t, at + scale, side="right")
    if np.any(np.abs(temp[lo:hi] - t_set) > policy.tol_t):
        return CaptureEvent(at, False, Reason.TEMP)
    if np.any(np.abs(frac[lo:hi] - f_set) > policy.tol_f):
        return CaptureEvent(at, False, Reason.CO2)
    return CaptureEvent(at, True, Reason.OK)


def gate(history, policy: GatePolicy, setpoints, at: float) -> CaptureEvent:
    """Decide whether a capture at time ``at`` is allowed.

    Every record in the closed window ``[at - hold, at]`` must be within
    tolerance of ``setpoints = (t_set, f_set)`` and the history must cover the
    whole window. Temperature is checked before CO2.
    """
    t, temp, frac = _columns(history, policy)
    _check_sorted(t)
    if t.size and at < t[0] - _EPS * max(1.0, abs(at)):
        raise InvalidParameterError(f"capture time {at!r} precedes the history start {t[0]!r}")
    return _gate(t, temp, frac, policy, setpoints, at)


def capture_times(duration, interval):
    n = int(math.floor(duration / interval + 1e-9))
    return [k * interval for k in range(1, n + 1)]


def schedule_captures(telemetry, policy: GatePolicy, setpoints) -> list:
    """Apply the gate at every ``k * capture_interval`` inside the run."""
    if len(telemetry) == 0:
        raise InvalidParameterError("telemetry is empty")
    t, temp, frac = _columns(telemetry, policy)
    _check_sorted(t)
    return [
        _gate(t, temp, frac, policy, setpoints, at)
        for at in capture_times(float(t[-1]), policy.capture_interval)
    ]
