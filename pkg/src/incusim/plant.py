"""Thermal and CO2 plant models of the incubator chamber.

Both plants are linear first-order systems, so each step uses the exact
solution over ``dt`` rather than a numerical integrator:

    T' = T_eff + (T - T_eff) * exp(-dt / tau)
    F' = F*    + (F - F*)    * exp(-a * dt)
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class InvalidParameterError(ValueError):
    """Raised when a model parameter or argument is outside its domain.

    ``violations`` lists ``(field, message)`` pairs when several fields failed.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


ABSOLUTE_ZERO_C = -273.15


def _check(violations):
    if violations:
        raise InvalidParameterError("; ".join(f"{k}: {msg}" for k, msg in violations), violations)


@dataclass(frozen=True)
class ThermalParams:
    """Air volume constants plus heater power and ambient temperature.

    Defaults are the 293-303 K air properties and chamber dimensions of the
    prototype; ``heater_power`` and ``t_ambient`` are room-condition choices.
    """

    rho: float = 1.184            # kg/m^3
    volume: float = 0.00065       # m^3
    cp: float = 1007.0            # J/(kg K)
    h: float = 10.0               # W/(m^2 K)
    area: float = 0.0036          # m^2
    t_ambient: float = 23.0       # degC
    heater_power: float = 1.5     # W

    def violations(self):
        out = []
        for name in ("rho", "volume", "cp", "h", "area"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                out.append((name, f"must be finite and > 0, got {v!r}"))
        # zero power is a disconnected heater
        if not (math.isfinite(self.heater_power) and self.heater_power >= 0):
            out.append(("heater_power", f"must be >= 0, got {self.heater_power!r}"))
        if not (math.isfinite(self.t_ambient) and self.t_ambient > ABSOLUTE_ZERO_C):
            out.append(("t_ambient", f"must be above {ABSOLUTE_ZERO_C} degC, got {self.t_ambient!r}"))
        if not out and not (math.isfinite(self.tau) and self.tau > 0):
            out.append(("tau", "derived time constant is not finite and positive"))
        return out

    def __post_init__(self):
        _check(self.violations())

    @property
    def mass(self):
        return self.rho * self.volume

    @property
    def hA(self):
        return self.h * self.area

    @property
    def tau(self):
        return self.rho * self.volume * self.cp / (self.h * self.area)


@dataclass(frozen=True)
class GasParams:
    """Well-mixed chamber fed with pure CO2 through an orifice."""

    volume: float = 0.00065            # m^3
    orifice_diameter: float = 0.003    # m
    injection_velocity: float = 10.0   # m/s
    f_ambient: float = 0.0004
    leak_rate: float = 0.001           # 1/s

    def violations(self):
        out = []
        for name in ("volume", "orifice_diameter"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                out.append((name, f"must be finite and > 0, got {v!r}"))
        # zero velocity is a shut-off supply
        if not (math.isfinite(self.injection_velocity) and self.injection_velocity >= 0):
            out.append(("injection_velocity", f"must be >= 0, got {self.injection_velocity!r}"))
        if not (math.isfinite(self.leak_rate) and self.leak_rate >= 0):
            out.append(("leak_rate", f"must be >= 0, got {self.leak_rate!r}"))
        if not (0 <= self.f_ambient < 1):
            out.append(("f_ambient", f"must lie in [0, 1), got {self.f_ambient!r}"))
        return out

    def __post_init__(self):
        _check(self.violations())


def time_constant(p: ThermalParams) -> float:
    """tau = rho*V*cp / (h*A), in seconds."""
    return p.tau


def effective_forcing(p: ThermalParams, heater_on: bool) -> float:
    """Temperature the chamber relaxes toward for the given heater state.

    The heater enters the energy balance as an additive power term, which is
    the same as raising the forcing temperature by ``P / (h*A)``.
    """
    if heater_on:
        return p.t_ambient + p.heater_power / p.hA
    return p.t_ambient


def thermal_step(t_chamber: float, p: ThermalParams, heater_on: bool, dt: float) -> float:
    if not dt >= 0:
        raise InvalidParameterError(f"dt must be >= 0, got {dt!r}")
    if dt == 0:
        return t_chamber
    t_eff = effective_forcing(p, heater_on)
    return t_eff + (t_chamber - t_eff) * math.exp(-dt / p.tau)


def step_response(p: ThermalParams, delta_x: float, t: float) -> float:
    """Open-loop response of the first-order lag to a step of ``delta_x``."""
    if not t >= 0:
        raise InvalidParameterError(f"t must be >= 0, got {t!r}")
    return delta_x * -math.expm1(-t / p.tau)


def orifice_flow(g: GasParams) -> float:
    """Volumetric CO2 flow through the orifice while the valve is open, m^3/s."""
    r = 0.5 * g.orifice_diameter
    return math.pi * r * r * g.injection_velocity


def gas_rates(g: GasParams, valve_open: bool, flow=None, extra_mix=0.0):
    """Relaxation rate and equilibrium fraction of the CO2 balance.

    dF/dt = (Q/V)(1 - F) u - k (F - f_amb) is linear in F with rate
    a = Q u / V + k and equilibrium (Q u / V + k f_amb) / a. ``flow``
    overrides the orifice flow and ``extra_mix`` adds to the leak rate.
    """
    q = orifice_flow(g) if flow is None else flow
    inj = q / g.volume if valve_open else 0.0
    k = g.leak_rate + extra_mix
    a = inj + k
    if a <= 0:
        return 0.0, 0.0
    return a, (inj + k * g.f_ambient) / a


def gas_step(f: float, g: GasParams, valve_open: bool, dt: float) -> float:
    if not 0 <= f <= 1:
        raise InvalidParameterError(f"fraction must lie in [0, 1], got {f!r}")
    if not dt >= 0:
        raise InvalidParameterError(f"dt must be >= 0, got {dt!r}")
    a, eq = gas_rates(g, valve_open)
    if a == 0 or dt == 0:
        return f
    out = eq + (f - eq) * math.exp(-a * dt)
    return min(out, 1.0)


def fill_time(g: GasParams, f0: float, f1: float, flow=None) -> float:
    """Open-valve time to go from ``f0`` to ``f1``, ignoring leakage."""
    q = orifice_flow(g) if flow is None else flow
    if not 0 <= f0 < 1 or not 0 <= f1 < 1:
        raise InvalidParameterError("fractions must lie in [0, 1)")
    return g.volume / q * math.log((1 - f0) / (1 - f1))
