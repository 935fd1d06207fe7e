"""Digital twin of a portable CO2 cell incubator.

First-order thermal plant, well-mixed CO2 chamber, hysteretic on/off control
of heater and valve, sensor models with linear calibration, and an imaging
gate, tied together by a deterministic fixed-step simulation loop.
"""
from ._accel import HAS_NUMBA, backend
from .control import ActuatorState, ControlConfig, heater_command, valve_command
from .engine import (
    AmbientChange,
    ConfigError,
    DoorOpen,
    RunResult,
    SimConfig,
    SupplyDrop,
    integrate_actuation,
    open_loop_step,
    run,
    sweep,
    with_param,
)
from .gating import CaptureEvent, GatePolicy, Reason, gate, schedule_captures
from .metrics import SummaryMetrics, duty_cycle, settling_time
from .plant import (
    GasParams,
    InvalidParameterError,
    ThermalParams,
    effective_forcing,
    gas_step,
    orifice_flow,
    step_response,
    thermal_step,
    time_constant,
)
from .sensing import (
    Calibration,
    DegenerateInputError,
    SensorModel,
    apply_calibration,
    calibrate,
    sample,
)
from .telemetry import Telemetry, TelemetryRecord

__version__ = "0.1.0"
