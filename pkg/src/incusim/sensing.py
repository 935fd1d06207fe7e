"""Sensor simulation and linear calibration against reference readings."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import measure
from .plant import InvalidParameterError, _check


class DegenerateInputError(ValueError):
    """Calibration data cannot determine a gain and an offset."""


@dataclass(frozen=True)
class SensorModel:
    """Sampled sensor: ``quantize(gain*x + offset + noise)``.

    ``resolution == 0`` disables quantization.
    """

    period: float = 1.0
    noise_sigma: float = 0.0
    resolution: float = 0.0
    gain: float = 1.0
    offset: float = 0.0

    def violations(self):
        out = []
        if not (math.isfinite(self.period) and self.period > 0):
            out.append(("period", f"must be > 0, got {self.period!r}"))
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            out.append(("noise_sigma", f"must be >= 0, got {self.noise_sigma!r}"))
        if not (math.isfinite(self.resolution) and self.resolution >= 0):
            out.append(("resolution", f"must be >= 0, got {self.resolution!r}"))
        if not (math.isfinite(self.gain) and self.gain != 0):
            out.append(("gain", "must be finite and nonzero"))
        if not math.isfinite(self.offset):
            out.append(("offset", "must be finite"))
        return out

    def __post_init__(self):
        _check(self.violations())

    @property
    def ideal(self):
        return self.noise_sigma == 0 and self.resolution == 0 and self.gain == 1 and self.offset == 0


TEMP_SENSOR = SensorModel(period=1.0, noise_sigma=0.1, resolution=0.0625)
CO2_SENSOR = SensorModel(period=1.0, noise_sigma=0.0005, resolution=0.0001)


@dataclass(frozen=True)
class Calibration:
    gain: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.gain) and self.gain != 0):
            raise InvalidParameterError("calibration gain must be finite and nonzero")
        if not math.isfinite(self.offset):
            raise InvalidParameterError("calibration offset must be finite")


def quantize(value, resolution):
    if resolution > 0:
        return math.floor(value / resolution + 0.5) * resolution
    return value


def sample(true_value: float, m: SensorModel, rng: np.random.Generator) -> float:
    """One reading; always consumes exactly one standard normal draw."""
    z = rng.standard_normal()
    return float(measure(float(true_value), m.gain, m.offset, m.noise_sigma, z, m.resolution))


def calibrate(pairs) -> Calibration:
    """Least-squares ``reference ~ gain*raw + offset`` from (raw, reference) pairs."""
    data = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
    raw, ref = data[:, 0], data[:, 1]
    if np.unique(raw).size < 2:
        raise DegenerateInputError("calibration needs at least two distinct raw values")
    A = np.column_stack([raw, np.ones_like(raw)])
    (gain, offset), *_ = np.linalg.lstsq(A, ref, rcond=None)
    return Calibration(float(gain), float(offset))


def apply_calibration(reading, c: Calibration):
    return c.gain * reading + c.offset
