"""Column-oriented telemetry produced by a simulation run."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class TelemetryRecord(NamedTuple):
    t: float
    t_true: float
    t_meas: float
    f_true: float
    f_meas: float
    heater: bool
    valve: bool


@dataclass(frozen=True, eq=False)
class Telemetry:
    """One row per plant step; row k describes the state at the end of step k.

    ``heater``/``valve`` are the actuator states that were applied during the
    step and ``t_meas``/``f_meas`` the held samples the controllers saw.
    """

    t: np.ndarray
    t_true: np.ndarray
    t_meas: np.ndarray
    f_true: np.ndarray
    f_meas: np.ndarray
    heater: np.ndarray
    valve: np.ndarray

    @classmethod
    def from_records(cls, records):
        cols = list(zip(*records)) if records else [()] * 7
        return cls(
            *(np.asarray(c, dtype=float) for c in cols[:5]),
            np.asarray(cols[5], dtype=bool),
            np.asarray(cols[6], dtype=bool),
        )

    def __len__(self):
        return self.t.size

    def __getitem__(self, i):
        return TelemetryRecord(
            float(self.t[i]), float(self.t_true[i]), float(self.t_meas[i]),
            float(self.f_true[i]), float(self.f_meas[i]),
            bool(self.heater[i]), bool(self.valve[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def duration(self):
        return float(self.t[-1]) if len(self) else 0.0
