"""Step-response and actuator statistics over sampled series."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class SummaryMetrics:
    t_settle: Optional[float]
    overshoot: float
    t_duty: float
    f_duty: float
    t_ripple: float
    f_ripple: float
    heater_cycles: int
    valve_cycles: int
    heater_energy: float
    co2_consumed: float
    captures_permitted: int
    captures_denied: int

    def as_dict(self):
        return asdict(self)

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]


def settling_time(t, y, target, band):
    """Earliest time after which ``|y - target| <= band`` holds for good.

    Returns ``None`` when the series ends outside the band.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size == 0:
        raise ValueError("series is empty")
    if t.size > 1 and np.any(np.diff(t) < 0):
        raise ValueError("series must be time-ordered")
    outside = np.flatnonzero(np.abs(y - target) > band)
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    if last == t.size - 1:
        return None
    return float(t[last + 1])


def _step_weights(t):
    # each sample stands for the interval that ends at it
    w = np.diff(t, prepend=np.nan)
    if t.size > 1:
        w[0] = w[1]
    else:
        w[0] = 1.0
    return w


def duty_cycle(t, u, window=None):
    """Time-weighted on-fraction of a 0/1 series within ``window=(start, end)``."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    w = _step_weights(t)
    if window is not None:
        lo, hi = window
        keep = (t > lo) & (t <= hi)
        t, u, w = t[keep], u[keep], w[keep]
    total = w.sum()
    if total <= 0:
        return 0.0
    return float(np.clip(np.dot(w, u) / total, 0.0, 1.0))


def ripple(y):
    y = np.asarray(y, dtype=float)
    return float(y.max() - y.min()) if y.size else 0.0


def rising_edges(u):
    """Number of off-to-on switches, counting a start in the on state."""
    u = np.asarray(u, dtype=bool)
    if u.size == 0:
        return 0
    return int(u[0]) + int(np.count_nonzero(u[1:] & ~u[:-1]))


def switch_times(t, u):
    """Times at which the actuator state differs from the previous step.

    A record at ``t[i]`` covers the step that started at ``t[i] - dt``; the
    switch happened at that start.
    """
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=bool)
    w = _step_weights(t)
    idx = np.flatnonzero(u[1:] != u[:-1]) + 1
    return t[idx] - w[idx]
