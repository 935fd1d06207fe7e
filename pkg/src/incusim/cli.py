"""Command-line front end.

Exit codes: 0 success, 1 step-response check failed, 2 invalid config or
arguments, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from . import __version__
from .config import dump_config, load_config
from .engine import ConfigError, open_loop_step, open_loop_value, run, sweep, with_param
from .metrics import SummaryMetrics

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_IO = 3

TELEMETRY_HEADER = ["t", "T_true", "T_meas", "F_true", "F_meas", "heater", "valve"]
CAPTURES_HEADER = ["t", "permitted", "reason"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def num(x):
    """Locale-independent number with 9 significant digits."""
    return format(float(x), ".9g")


def telemetry_csv(tel) -> str:
    buf = io.StringIO()
    buf.write(",".join(TELEMETRY_HEADER) + "\n")
    cols = (tel.t, tel.t_true, tel.t_meas, tel.f_true, tel.f_meas)
    for t, T, Tm, F, Fm, h, v in zip(*(c.tolist() for c in cols), tel.heater.tolist(), tel.valve.tolist()):
        buf.write(f"{t:.9g},{T:.9g},{Tm:.9g},{F:.9g},{Fm:.9g},{int(h)},{int(v)}\n")
    return buf.getvalue()


def captures_csv(captures) -> str:
    lines = [",".join(CAPTURES_HEADER)]
    lines += [f"{num(c.time)},{int(c.permitted)},{c.reason.value}" for c in captures]
    return "\n".join(lines) + "\n"


def summary_json(metrics: SummaryMetrics) -> str:
    return json.dumps(metrics.as_dict(), indent=2) + "\n"


def sweep_csv(param, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = SummaryMetrics.keys()
    w.writerow(["param", "value", *keys])
    for value, m in rows:
        d = m.as_dict()
        w.writerow([param, num(value), *("" if d[k] is None else
                                        d[k] if isinstance(d[k], int) else num(d[k]) for k in keys)])
    return buf.getvalue()


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(args, overrides=None):
    return load_config(args.config, overrides)


def cmd_validate(args):
    cfg = _load(args)
    sys.stdout.write(dump_config(cfg))
    return EXIT_OK


def cmd_simulate(args):
    overrides = {}
    if args.seed is not None:
        overrides["sim.seed"] = args.seed
    if args.duration is not None:
        overrides["sim.duration"] = args.duration
    out_dir = args.out_dir or os.environ.get("INCUSIM_OUT_DIR")
    if not out_dir:
        print("error: --out-dir not given and INCUSIM_OUT_DIR is not set", file=sys.stderr)
        return EXIT_INVALID
    cfg = _load(args, overrides)
    result = run(cfg, backend=args.backend)
    os.makedirs(out_dir, exist_ok=True)
    summary = summary_json(result.metrics)
    write_atomic(os.path.join(out_dir, "telemetry.csv"), telemetry_csv(result.telemetry))
    write_atomic(os.path.join(out_dir, "captures.csv"), captures_csv(result.captures))
    write_atomic(os.path.join(out_dir, "summary.json"), summary)
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_step_response(args):
    if not args.duration >= 0:
        print(f"error: --duration must be >= 0, got {args.duration}", file=sys.stderr)
        return EXIT_INVALID
    cfg = _load(args)
    th = cfg.thermal
    t, sim, analytic = open_loop_step(th, args.delta, args.duration, cfg.dt)
    err = abs(sim - analytic)
    stride = max(1, int(round(args.every / cfg.dt)))
    out = sys.stdout
    out.write(f"# tau = {num(th.tau)} s, delta = {num(args.delta)} K, dt = {num(cfg.dt)} s\n")
    out.write("t,simulated,analytic,abs_error\n")
    for i in range(0, t.size, stride):
        out.write(f"{num(t[i])},{num(sim[i])},{num(analytic[i])},{num(err[i])}\n")
    if args.duration >= th.tau:
        at_tau = open_loop_value(th, args.delta, th.tau, cfg.dt)
        frac = at_tau / args.delta if args.delta else 0.0
        out.write(f"# at t = tau: simulated = {num(at_tau)} ({100 * frac:.6f}% of delta)\n")
    max_err = float(err.max())
    limit = 1e-6 * abs(args.delta)
    ok = max_err <= limit
    out.write(f"# max abs error = {max_err:.3e} K (limit {limit:.3e}): {'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _parse_values(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError([("--values", f"expected a comma-separated list of numbers, got {text!r}")]) from None
    if not values:
        raise ConfigError([("--values", "no values given")])
    return values


def cmd_sweep(args):
    cfg = _load(args)
    values = _parse_values(args.values)
    with_param(cfg, args.param, values[0])  # fail fast on a bad path
    rows = sweep(cfg, args.param, values, backend=args.backend)
    text = sweep_csv(args.param, rows)
    if args.out:
        parent = os.path.dirname(os.path.abspath(args.out))
        os.makedirs(parent, exist_ok=True)
        write_atomic(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="incusim", description="Incubator digital-twin simulator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="INI config file (default: packaged defaults)")

    def backend(sp):
        sp.add_argument("--backend", choices=["numba", "numpy"], default=None,
                        help="loop implementation (default: numba when available)")

    sp = sub.add_parser("simulate", help="closed-loop run; writes telemetry, captures and summary")
    common(sp)
    backend(sp)
    sp.add_argument("--out-dir", help="output directory (falls back to $INCUSIM_OUT_DIR)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--duration", type=float)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("step-response", help="open-loop step vs the first-order closed form")
    common(sp)
    sp.add_argument("--delta", type=float, required=True, help="step size, K")
    sp.add_argument("--duration", type=float, required=True, help="seconds")
    sp.add_argument("--every", type=float, default=1.0, help="table row spacing, s")
    sp.set_defaults(func=cmd_step_response)

    sp = sub.add_parser("sweep", help="one run per value of a numeric parameter")
    common(sp)
    backend(sp)
    sp.add_argument("--param", required=True, help="section.key, e.g. control.t_hyst")
    sp.add_argument("--values", required=True, help="comma-separated list")
    sp.add_argument("--out", help="CSV output path")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="check a config and print it with defaults filled in")
    common(sp)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for key, msg in exc.violations:
            print(f"  {key}: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
