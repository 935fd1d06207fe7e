"""Fixed-step closed-loop simulation of the incubator.

Per plant step ``k`` (``t = k*dt``) the loop does, in this order:

1. apply the events active at ``t``;
2. for each sensor due at ``t``: sample the true value, run its controller;
3. advance both plants over ``dt`` with the current actuator states;
4. record one telemetry row stamped ``t + dt``.

Controllers only see zero-order-held samples. All randomness comes from one
Philox generator seeded from the config, drawn up front.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _kernels
from .control import ControlConfig
from .gating import GatePolicy, schedule_captures
from .metrics import (
    SummaryMetrics,
    duty_cycle,
    rising_edges,
    ripple,
    settling_time,
)
from .plant import (
    InvalidParameterError,
    GasParams,
    ThermalParams,
    orifice_flow,
    thermal_step,
)
from .sensing import CO2_SENSOR, TEMP_SENSOR, SensorModel
from .telemetry import Telemetry


class ConfigError(InvalidParameterError):
    """Invalid simulation config; ``violations`` holds ``(key, message)`` pairs."""

    def __init__(self, violations):
        violations = list(violations)
        super().__init__("\n".join(f"{k}: {m}" for k, m in violations), violations)


# config sections and the SimConfig attribute each one maps to
SECTIONS = {
    "thermal": "thermal",
    "gas": "gas",
    "control": "control",
    "sensor_temp": "sensor_t",
    "sensor_co2": "sensor_f",
    "gate": "gate",
}
SIM_KEYS = ("dt", "duration", "seed", "initial_t", "initial_f")


@dataclass(frozen=True)
class AmbientChange:
    time: float
    new_t_ambient: float
    kind = "ambient_change"

    def violations(self):
        if not (math.isfinite(self.new_t_ambient) and self.new_t_ambient > -273.15):
            return [("new_t_ambient", "must be above absolute zero")]
        return []


@dataclass(frozen=True)
class DoorOpen:
    time: float
    duration: float
    h_multiplier: float
    gas_mix_rate: float
    kind = "door_open"

    def violations(self):
        out = []
        if not (math.isfinite(self.duration) and self.duration > 0):
            out.append(("duration", "must be > 0"))
        if not (math.isfinite(self.h_multiplier) and self.h_multiplier > 1):
            out.append(("h_multiplier", "must be > 1"))
        if not (math.isfinite(self.gas_mix_rate) and self.gas_mix_rate >= 0):
            out.append(("gas_mix_rate", "must be >= 0"))
        return out


@dataclass(frozen=True)
class SupplyDrop:
    time: float
    flow_multiplier: float
    kind = "supply_drop"

    def violations(self):
        if not 0 <= self.flow_multiplier <= 1:
            return [("flow_multiplier", "must lie in [0, 1]")]
        return []


Event = Union[AmbientChange, DoorOpen, SupplyDrop]
EVENT_TYPES = {cls.kind: cls for cls in (AmbientChange, DoorOpen, SupplyDrop)}


def _sample_every(period, dt):
    m = round(period / dt)
    if m < 1 or abs(m * dt - period) > 1e-9 * max(1.0, period):
        return None
    return int(m)


@dataclass(frozen=True)
class SimConfig:
    thermal: ThermalParams = field(default_factory=ThermalParams)
    gas: GasParams = field(default_factory=GasParams)
    control: ControlConfig = field(default_factory=ControlConfig)
    sensor_t: SensorModel = TEMP_SENSOR
    sensor_f: SensorModel = CO2_SENSOR
    gate: GatePolicy = field(default_factory=GatePolicy)
    dt: float = 0.01
    duration: float = 600.0
    seed: int = 0
    initial_t: float = 23.0
    initial_f: float = 0.0004
    events: tuple = ()

    def violations(self):
        out = []
        if not (math.isfinite(self.dt) and self.dt > 0):
            out.append(("sim.dt", f"must be > 0, got {self.dt!r}"))
        if not (math.isfinite(self.duration) and self.duration > 0):
            out.append(("sim.duration", f"must be > 0, got {self.duration!r}"))
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            out.append(("sim.seed", "must be an integer in [0, 2**64)"))
        if not (math.isfinite(self.initial_t) and self.initial_t > -273.15):
            out.append(("sim.initial_t", "must be above absolute zero"))
        if not 0 <= self.initial_f <= 1:
            out.append(("sim.initial_f", f"must lie in [0, 1], got {self.initial_f!r}"))
        if not out:
            for section, attr in (("sensor_temp", "sensor_t"), ("sensor_co2", "sensor_f")):
                if _sample_every(getattr(self, attr).period, self.dt) is None:
                    out.append((f"{section}.period", "must be a positive integer multiple of sim.dt"))
        for i, ev in enumerate(self.events):
            if not (0 <= ev.time <= self.duration):
                out.append((f"events[{i}].time", f"must lie in [0, {self.duration}], got {ev.time!r}"))
            out.extend((f"events[{i}].{k}", m) for k, m in ev.violations())
        return out

    def __post_init__(self):
        if self.violations():
            raise ConfigError(self.violations())

    @property
    def n_steps(self):
        return int(round(self.duration / self.dt))


def with_param(cfg: SimConfig, path: str, value) -> SimConfig:
    """Copy of ``cfg`` with ``section.key`` (e.g. ``control.t_hyst``) replaced."""
    section, _, key = path.partition(".")
    if section == "sim":
        if key not in SIM_KEYS:
            raise ConfigError([(path, "unknown parameter")])
        if key == "seed":
            value = int(value)
        return dataclasses.replace(cfg, **{key: value})
    attr = SECTIONS.get(section)
    if attr is None:
        raise ConfigError([(path, "unknown section")])
    sub = getattr(cfg, attr)
    names = {f.name for f in dataclasses.fields(sub)}
    if key not in names or isinstance(getattr(sub, key), (str, bool)):
        raise ConfigError([(path, "not a numeric parameter")])
    try:
        new = dataclasses.replace(sub, **{key: float(value)})
    except InvalidParameterError as exc:
        raise ConfigError([(path, str(exc))]) from None
    return dataclasses.replace(cfg, **{attr: new})


@dataclass(frozen=True)
class Coefficients:
    """Per-step plant coefficients after events are applied."""

    th_decay: np.ndarray
    th_on: np.ndarray
    th_off: np.ndarray
    g_dec_open: np.ndarray
    g_eq_open: np.ndarray
    g_dec_closed: np.ndarray
    g_eq_closed: np.ndarray
    flow: np.ndarray


def _gas_coeffs(inj, k, f_amb, dt):
    a = inj + k
    pos = a > 0
    safe = np.where(pos, a, 1.0)
    eq = np.where(pos, (inj + k * f_amb) / safe, 0.0)
    dec = np.where(pos, np.exp(-safe * dt), 1.0)
    return dec, eq


def step_coefficients(cfg: SimConfig) -> Coefficients:
    n = cfg.n_steps
    tk = np.arange(n) * cfg.dt
    eps = 1e-9 * max(1.0, cfg.duration)

    th, gas = cfg.thermal, cfg.gas
    t_amb = np.full(n, th.t_ambient)
    h_mult = np.ones(n)
    mix = np.zeros(n)
    q_mult = np.ones(n)
    for ev in sorted(cfg.events, key=lambda e: e.time):
        after = tk >= ev.time - eps
        if isinstance(ev, AmbientChange):
            t_amb[after] = ev.new_t_ambient
        elif isinstance(ev, SupplyDrop):
            q_mult[after] = ev.flow_multiplier
        elif isinstance(ev, DoorOpen):
            active = after & (tk < ev.time + ev.duration - eps)
            h_mult[active] *= ev.h_multiplier
            mix[active] += ev.gas_mix_rate

    hA = th.h * h_mult * th.area
    tau = th.rho * th.volume * th.cp / hA
    flow = orifice_flow(gas) * q_mult
    inj = flow / gas.volume
    k = gas.leak_rate + mix
    g_dec_open, g_eq_open = _gas_coeffs(inj, k, gas.f_ambient, cfg.dt)
    g_dec_closed, g_eq_closed = _gas_coeffs(np.zeros(n), k, gas.f_ambient, cfg.dt)
    return Coefficients(
        th_decay=np.exp(-cfg.dt / tau),
        th_on=t_amb + th.heater_power / hA,
        th_off=t_amb,
        g_dec_open=g_dec_open,
        g_eq_open=g_eq_open,
        g_dec_closed=g_dec_closed,
        g_eq_closed=g_eq_closed,
        flow=flow,
    )


_MODE_CODES = {"auto": _kernels.AUTO, "on": _kernels.FORCED_ON, "off": _kernels.FORCED_OFF}


@dataclass(frozen=True, eq=False)
class RunResult:
    config: SimConfig
    telemetry: Telemetry
    captures: list
    metrics: SummaryMetrics
    flow: np.ndarray
    backend: str

    def __iter__(self):
        # allows ``telemetry, captures, metrics = run(cfg)``
        return iter((self.telemetry, self.captures, self.metrics))


def simulate_telemetry(cfg: SimConfig, backend=None):
    """Run the loop and return ``(telemetry, per-step flow, backend used)``."""
    n = cfg.n_steps
    every_t = _sample_every(cfg.sensor_t.period, cfg.dt)
    every_f = _sample_every(cfg.sensor_f.period, cfg.dt)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    z_t = rng.standard_normal(-(-n // every_t))
    z_f = rng.standard_normal(-(-n // every_f))

    c = step_coefficients(cfg)
    st, sf, ctl = cfg.sensor_t, cfg.sensor_f, cfg.control
    if backend is None:
        backend = "numba" if _kernels.HAS_NUMBA else "numpy"
    T, Tm, F, Fm, heater, valve = _kernels.closed_loop(
        n, cfg.dt, every_t, every_f, float(cfg.initial_t), float(cfg.initial_f),
        c.th_decay, c.th_on, c.th_off,
        c.g_dec_open, c.g_eq_open, c.g_dec_closed, c.g_eq_closed,
        np.array([st.gain, st.offset, st.noise_sigma, st.resolution]), z_t,
        np.array([sf.gain, sf.offset, sf.noise_sigma, sf.resolution]), z_f,
        np.array([ctl.t_set, ctl.t_hyst, ctl.f_set, ctl.f_hyst, ctl.min_dwell_on, ctl.min_dwell_off]),
        _MODE_CODES[ctl.heater_mode], _MODE_CODES[ctl.valve_mode],
        backend=backend,
    )
    t = np.arange(1, n + 1) * cfg.dt
    tel = Telemetry(t, T, Tm, F, Fm, heater.astype(bool), valve.astype(bool))
    return tel, c.flow, backend


def _actuation(cfg, tel, flow):
    energy = cfg.thermal.heater_power * cfg.dt * float(np.count_nonzero(tel.heater))
    co2 = cfg.dt * float(np.dot(flow, tel.valve))
    return energy, co2


def integrate_actuation(result: RunResult):
    """Heater energy (J) and CO2 volume injected (m^3) over the run."""
    return _actuation(result.config, result.telemetry, result.flow)


def summarize(cfg: SimConfig, tel: Telemetry, captures, flow, steady_fraction=1 / 3) -> SummaryMetrics:
    ctl = cfg.control
    t0 = np.concatenate(([0.0], tel.t))
    y0 = np.concatenate(([cfg.initial_t], tel.t_true))
    window_start = cfg.duration * (1 - steady_fraction)
    tail = tel.t > window_start
    energy, co2 = _actuation(cfg, tel, flow)
    permitted = sum(1 for c in captures if c.permitted)
    return SummaryMetrics(
        t_settle=settling_time(t0, y0, ctl.t_set, cfg.gate.tol_t),
        overshoot=max(0.0, float(tel.t_true.max()) - ctl.t_set),
        t_duty=duty_cycle(tel.t, tel.heater, (window_start, cfg.duration)),
        f_duty=duty_cycle(tel.t, tel.valve, (window_start, cfg.duration)),
        t_ripple=ripple(tel.t_true[tail]),
        f_ripple=ripple(tel.f_true[tail]),
        heater_cycles=rising_edges(tel.heater),
        valve_cycles=rising_edges(tel.valve),
        heater_energy=energy,
        co2_consumed=co2,
        captures_permitted=permitted,
        captures_denied=len(captures) - permitted,
    )


def run(cfg: SimConfig, backend: Optional[str] = None) -> RunResult:
    tel, flow, used = simulate_telemetry(cfg, backend)
    captures = schedule_captures(tel, cfg.gate, (cfg.control.t_set, cfg.control.f_set))
    metrics = summarize(cfg, tel, captures, flow)
    return RunResult(cfg, tel, captures, metrics, flow, used)


def sweep(base: SimConfig, path: str, values, backend=None):
    """One run per value of ``path``, all with the base seed.

    Returns a list of ``(value, SummaryMetrics)`` rows in input order.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    configs = [with_param(base, path, v) for v in values]
    return [(v, run(c, backend).metrics) for v, c in zip(values, configs)]


def open_loop_step(thermal: ThermalParams, delta: float, duration: float, dt: float = 0.01):
    """Step the thermal plant from rest toward a forcing step of ``delta``.

    Works in deviation variables: the chamber starts at 0 and the forcing
    temperature is ``delta``. Returns ``(t, simulated, analytic)`` arrays on
    the grid ``0, dt, 2dt, ...`` up to ``duration``.
    """
    if not duration >= 0:
        raise InvalidParameterError(f"duration must be >= 0, got {duration!r}")
    if not dt > 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt!r}")
    dev = dataclasses.replace(thermal, t_ambient=float(delta), heater_power=0.0)
    n = int(math.floor(duration / dt + 1e-9))
    t = np.arange(n + 1) * dt
    sim = np.empty(n + 1)
    y = 0.0
    sim[0] = y
    for k in range(n):
        y = thermal_step(y, dev, False, dt)
        sim[k + 1] = y
    analytic = delta * -np.expm1(-t / thermal.tau)
    return t, sim, analytic


def open_loop_value(thermal: ThermalParams, delta: float, at: float, dt: float = 0.01) -> float:
    """Simulated open-loop response at an off-grid time ``at``."""
    t, sim, _ = open_loop_step(thermal, delta, at, dt)
    dev = dataclasses.replace(thermal, t_ambient=float(delta), heater_power=0.0)
    return thermal_step(float(sim[-1]), dev, False, at - float(t[-1]))
