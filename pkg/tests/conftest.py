import dataclasses
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from incusim import SimConfig, _kernels  # noqa: E402
from incusim.sensing import SensorModel  # noqa: E402

BACKENDS = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def ideal_config(**sim):
    """Default plant and controller, noiseless unit-gain sensors."""
    ideal = SensorModel(period=1.0)
    return SimConfig(sensor_t=ideal, sensor_f=ideal, **sim)


def tight_config(**sim):
    """Ideal sensors read every plant step and no dwell: the loop can hold the band."""
    base = SimConfig(**sim)
    ideal = SensorModel(period=base.dt)
    control = dataclasses.replace(base.control, min_dwell_on=0.0, min_dwell_off=0.0)
    return dataclasses.replace(base, sensor_t=ideal, sensor_f=ideal, control=control)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
