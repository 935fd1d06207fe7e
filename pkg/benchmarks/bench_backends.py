"""Compare the numba and numpy implementations of the closed-loop kernel.

    python benchmarks/bench_backends.py --runs 20 --duration 600
"""
import argparse
import dataclasses
import time

import numpy as np

from incusim import _kernels
from incusim.engine import SimConfig, run


def bench(backend, cfg, runs):
    run(cfg, backend)  # warm-up (jit compile / cache load)
    times = []
    for seed in range(runs):
        c = dataclasses.replace(cfg, seed=seed)
        t0 = time.perf_counter()
        run(c, backend)
        times.append(time.perf_counter() - t0)
    return np.array(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--duration", type=float, default=600.0)
    ap.add_argument("--dt", type=float, default=0.01)
    args = ap.parse_args()

    cfg = SimConfig(duration=args.duration, dt=args.dt)
    backends = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])
    print(f"{cfg.n_steps} steps per run, {args.runs} runs")
    print(f"{'backend':<8} {'median ms':>10} {'min ms':>8} {'steps/s':>12}")
    results = {}
    for b in backends:
        t = bench(b, cfg, args.runs)
        results[b] = t
        print(f"{b:<8} {1e3 * np.median(t):>10.2f} {1e3 * t.min():>8.2f} {cfg.n_steps / np.median(t):>12.3g}")
    if len(results) == 2:
        a = run(cfg, "numba").telemetry
        b = run(cfg, "numpy").telemetry
        print(f"speedup numba/numpy: {np.median(results['numpy']) / np.median(results['numba']):.2f}x")
        print(f"max |dT| between backends: {np.max(np.abs(a.t_true - b.t_true)):.2e} degC")
        print(f"max |dF| between backends: {np.max(np.abs(a.f_true - b.f_true)):.2e}")


if __name__ == "__main__":
    main()
