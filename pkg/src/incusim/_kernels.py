"""Hot loops of the closed-loop simulation.

Two interchangeable implementations of the fixed-step loop live here:

* ``closed_loop_jit``: a scalar per-step loop compiled with numba.
* ``closed_loop_numpy``: steps the plant segment-wise between controller
  updates with a vectorised affine recurrence, used when numba is disabled.

Both consume the same precomputed per-step coefficient arrays, so everything
that depends on events (``exp`` of time constants, equilibria) is computed
once in numpy by the caller.
"""
import math

import numpy as np

from ._accel import HAS_NUMBA, njit

AUTO = 0
FORCED_ON = 1
FORCED_OFF = 2

# float times are k*dt, so dwell comparisons need a little slack
TIME_EPS = 1e-9

# longest vectorised segment; keeps cumulative decay products well-scaled
_MAX_SEGMENT = 256


@njit(cache=True)
def measure(true_value, gain, offset, sigma, z, resolution):
    v = gain * true_value + offset + sigma * z
    if resolution > 0.0:
        # round half up: identical in numba and python
        v = math.floor(v / resolution + 0.5) * resolution
    return v


@njit(cache=True)
def hysteresis_decide(meas, setpoint, half_width, on, last_switch, now, dwell_on, dwell_off):
    """One on/off decision with a symmetric band and minimum dwell.

    Returns ``(on, last_switch)``; ``last_switch`` only moves on a real switch.
    """
    want = on
    if meas < setpoint - half_width:
        want = True
    elif meas > setpoint + half_width:
        want = False
    if want == on:
        return on, last_switch
    dwell = dwell_on if on else dwell_off
    if now - last_switch + TIME_EPS >= dwell:
        return want, now
    return on, last_switch


@njit(cache=True)
def _closed_loop_scalar(n, dt, every_t, every_f, T0, F0,
                        th_decay, th_on, th_off,
                        g_dec_open, g_eq_open, g_dec_closed, g_eq_closed,
                        sens_t, z_t, sens_f, z_f, ctl, heater_mode, valve_mode):
    T = np.empty(n)
    Tm = np.empty(n)
    F = np.empty(n)
    Fm = np.empty(n)
    heater = np.zeros(n, dtype=np.uint8)
    valve = np.zeros(n, dtype=np.uint8)

    t_now = T0
    f_now = F0
    t_held = 0.0
    f_held = 0.0
    h_on = heater_mode == FORCED_ON
    v_on = valve_mode == FORCED_ON
    h_last = -np.inf
    v_last = -np.inf
    jt = 0
    jf = 0

    for k in range(n):
        now = k * dt
        if k % every_t == 0:
            t_held = measure(t_now, sens_t[0], sens_t[1], sens_t[2], z_t[jt], sens_t[3])
            jt += 1
            if heater_mode == AUTO:
                h_on, h_last = hysteresis_decide(t_held, ctl[0], ctl[1], h_on, h_last, now, ctl[4], ctl[5])
        if k % every_f == 0:
            f_held = measure(f_now, sens_f[0], sens_f[1], sens_f[2], z_f[jf], sens_f[3])
            jf += 1
            if valve_mode == AUTO:
                v_on, v_last = hysteresis_decide(f_held, ctl[2], ctl[3], v_on, v_last, now, ctl[4], ctl[5])

        eff = th_on[k] if h_on else th_off[k]
        t_now = eff + (t_now - eff) * th_decay[k]
        if v_on:
            eq = g_eq_open[k]
            f_now = eq + (f_now - eq) * g_dec_open[k]
        else:
            eq = g_eq_closed[k]
            f_now = eq + (f_now - eq) * g_dec_closed[k]
        if f_now > 1.0:
            f_now = 1.0

        T[k] = t_now
        Tm[k] = t_held
        F[k] = f_now
        Fm[k] = f_held
        heater[k] = h_on
        valve[k] = v_on
    return T, Tm, F, Fm, heater, valve


def affine_run(x0, decay, target):
    """Solve ``x[j+1] = target[j] + (x[j] - target[j]) * decay[j]`` at once.

    Works in deviations from ``target[0]`` so that a state sitting on a
    constant target stays exactly there.
    """
    ref = target[0]
    forcing = (target - ref) * (1.0 - decay)
    P = np.cumprod(decay)
    if P[-1] < 1e-150:
        out = np.empty_like(decay)
        y = x0 - ref
        for j in range(decay.size):
            y = decay[j] * y + forcing[j]
            out[j] = y
        return ref + out
    if not forcing.any():
        return ref + P * (x0 - ref)
    return ref + P * ((x0 - ref) + np.cumsum(forcing / P))


def _closed_loop_numpy(n, dt, every_t, every_f, T0, F0,
                       th_decay, th_on, th_off,
                       g_dec_open, g_eq_open, g_dec_closed, g_eq_closed,
                       sens_t, z_t, sens_f, z_f, ctl, heater_mode, valve_mode):
    T = np.empty(n)
    Tm = np.empty(n)
    F = np.empty(n)
    Fm = np.empty(n)
    heater = np.zeros(n, dtype=np.uint8)
    valve = np.zeros(n, dtype=np.uint8)

    bounds = np.union1d(np.arange(0, n, every_t), np.arange(0, n, every_f))
    bounds = np.append(bounds, n)

    t_now, f_now = T0, F0
    t_held = f_held = 0.0
    h_on = heater_mode == FORCED_ON
    v_on = valve_mode == FORCED_ON
    h_last = v_last = -math.inf
    jt = jf = 0

    for a, b in zip(bounds[:-1], bounds[1:]):
        now = a * dt
        if a % every_t == 0:
            t_held = measure(t_now, sens_t[0], sens_t[1], sens_t[2], z_t[jt], sens_t[3])
            jt += 1
            if heater_mode == AUTO:
                h_on, h_last = hysteresis_decide(t_held, ctl[0], ctl[1], h_on, h_last, now, ctl[4], ctl[5])
        if a % every_f == 0:
            f_held = measure(f_now, sens_f[0], sens_f[1], sens_f[2], z_f[jf], sens_f[3])
            jf += 1
            if valve_mode == AUTO:
                v_on, v_last = hysteresis_decide(f_held, ctl[2], ctl[3], v_on, v_last, now, ctl[4], ctl[5])

        for lo in range(a, b, _MAX_SEGMENT):
            hi = min(lo + _MAX_SEGMENT, b)
            sl = slice(lo, hi)
            eff = th_on[sl] if h_on else th_off[sl]
            T[sl] = affine_run(t_now, th_decay[sl], eff)
            if v_on:
                F[sl] = affine_run(f_now, g_dec_open[sl], g_eq_open[sl])
            else:
                F[sl] = affine_run(f_now, g_dec_closed[sl], g_eq_closed[sl])
            np.minimum(F[sl], 1.0, out=F[sl])
            t_now, f_now = T[hi - 1], F[hi - 1]
        Tm[a:b] = t_held
        Fm[a:b] = f_held
        heater[a:b] = h_on
        valve[a:b] = v_on
    return T, Tm, F, Fm, heater, valve


closed_loop_jit = _closed_loop_scalar if HAS_NUMBA else None
closed_loop_numpy = _closed_loop_numpy


def closed_loop(*args, backend=None):
    """Dispatch to the compiled loop when available (or when asked for)."""
    if backend is None:
        backend = "numba" if HAS_NUMBA else "numpy"
    if backend == "numba":
        if closed_loop_jit is None:
            raise RuntimeError("numba backend requested but numba is disabled or missing")
        return closed_loop_jit(*args)
    if backend == "numpy":
        return closed_loop_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")
