"""Command-line entry point: ``circumnav run|sweep|verify|pe-check``.

Errors map to exit codes through ``CircumnavError.exit_code``:
2 parse/config, 3 schema, 4 validation, 5 invariant, 6 numerical,
7 output, 8 insufficient data, 1 failed acceptance criteria.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, load_dict, set_path, to_dict
from .errors import CircumnavError, ConfigError, InsufficientData, OutputError
from .metrics import summarize
from .output import read_trajectory, write_outputs
from .sim import pe_check, pe_report, run, run_many

OUT_ENV = "CIRCUMNAV_OUT"
DEFAULT_OUT = "runs"
EXIT_CRITERIA_FAILED = 1

log = logging.getLogger("circumnav")


def default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT))


def _emit(rows, out=None) -> None:
    """Write ``rows`` as comma-delimited lines to stdout."""
    w = csv.writer(out or sys.stdout, lineterminator="\n")
    w.writerows(rows)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


# run -------------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.strict:
        cfg = replace(cfg, strict=True)
    rec = run(cfg)
    summary = summarize(rec)
    try:
        pe = pe_report(rec)
    except InsufficientData as exc:
        log.warning("PE check skipped: %s", exc)
        pe = None
    out = Path(args.out) if args.out else default_out() / (cfg.name or "run")
    bundle = write_outputs(rec, summary, out, plot=args.plot, pe=pe)
    rows = [("key", "value")]
    rows += [(k, _fmt(v) if not isinstance(v, (list, tuple)) else ";".join(map(_fmt, v)))
             for k, v in summary.to_dict().items()]
    if pe:
        rows += [(f"pe_{k}", f"{v['verdict']};{_fmt(v['min_value'])}") for k, v in pe.items()]
    rows.append(("violations", len(rec.violations)))
    rows.append(("trajectory", bundle.trajectory))
    rows.append(("summary_json", bundle.summary))
    rows += [("plot", p) for p in bundle.plots]
    _emit(rows)
    if rec.violations:
        log.warning("%d invariant violation(s) recorded; first: %s",
                    len(rec.violations), rec.violations[0])
    return 0


# sweep -----------------------------------------------------------------

def parse_range(text: str) -> list:
    """``a:b`` (integers a..b), ``a:b:step`` or ``v1,v2,...``."""
    def num(s):
        s = s.strip()
        try:
            return int(s)
        except ValueError:
            return float(s)

    try:
        if ":" in text:
            parts = [num(p) for p in text.split(":")]
            if len(parts) == 2:
                a, b = parts
                step = 1
            elif len(parts) == 3:
                a, b, step = parts
            else:
                raise ValueError(text)
            if step <= 0 or b < a:
                raise ValueError(text)
            count = int(np.floor((b - a) / step + 1e-9)) + 1
            vals = [a + k * step for k in range(count)]
            if all(isinstance(v, int) for v in (a, b, step)):
                return vals
            return [round(float(v), 12) for v in vals]
        return [num(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"bad range {text!r}; use a:b, a:b:step or v1,v2,...") from None


def parse_vary(text: str) -> tuple[str, list]:
    key, sep, rng = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"bad --vary {text!r}; expected key=range")
    vals = parse_range(rng)
    if not vals:
        raise ConfigError(f"empty range in --vary {text!r}")
    return key.strip(), vals


SWEEP_COLUMNS = ("max_Db1", "max_c_err", "max_r_err", "max_beta1_err", "max_abs_U",
                 "final_c_err", "final_r_err", "violations", "r_hat_clips")


def sweep_row(rec) -> tuple:
    s = summarize(rec)
    return (s.max_Db[0], s.max_c_err, s.max_r_err, s.max_beta_err[0], s.max_abs_U,
            s.final_c_err, s.final_r_err, len(rec.violations), rec.events.get("r_hat_clips", 0))


def cmd_sweep(args) -> int:
    base = to_dict(load_config(args.config))
    key, values = parse_vary(args.vary)
    configs = [load_dict(set_path(base, key, v)) for v in values]
    results = run_many(configs, parallel=args.parallel, reduce=sweep_row)
    rows = [(key,) + SWEEP_COLUMNS]
    rows += [(_fmt(v),) + tuple(_fmt(x) for x in r) for v, r in zip(values, results)]
    buf = io.StringIO()
    _emit(rows, buf)
    out = Path(args.out) if args.out else default_out() / f"sweep-{key}"
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(buf.getvalue())
    except OSError as exc:
        raise OutputError(f"cannot write sweep results to {out}: {exc}") from exc
    sys.stdout.write(buf.getvalue())
    return 0


# verify ----------------------------------------------------------------

def cmd_verify(args) -> int:
    from . import acceptance

    def echo(line):
        print(line, flush=True)

    results = acceptance.run_all(echo=echo if args.details else None)
    rows = [("criterion", "title", "result", "failed_checks", "seconds")]
    for r in results:
        failed = sum(not c.passed for c in r.checks)
        rows.append((r.number, r.title, "PASS" if r.passed else "FAIL",
                     failed, f"{r.seconds:.1f}"))
    _emit(rows)
    return 0 if all(r.passed for r in results) else EXIT_CRITERIA_FAILED


# pe-check --------------------------------------------------------------

def cmd_pe_check(args) -> int:
    cols = read_trajectory(args.record)
    need = ("t", "U1_x", "U1_y", "Dc_1")
    missing = [c for c in need if c not in cols]
    if missing:
        raise ConfigError(f"{args.record}: missing columns {', '.join(missing)}")
    t = cols["t"]
    mask = t >= args.since - 1e-12
    signals = {
        "p1_dot": np.column_stack([cols["U1_x"], cols["U1_y"]])[mask],
        "Dc1_dot": np.gradient(cols["Dc_1"], t)[mask] if len(t) > 1 else cols["Dc_1"][mask],
    }
    rows = [("signal", "verdict", "min_value", "windows", "window", "epsilon")]
    for name, sig in signals.items():
        res = pe_check(t[mask], sig, args.window, args.epsilon, args.stride)
        rows.append((name, res.verdict, _fmt(res.min_value), len(res.windows),
                     _fmt(args.window), _fmt(args.epsilon)))
    _emit(rows)
    return 0


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circumnav",
                                 description="Multi-agent target circumnavigation simulator.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one configuration and write outputs")
    p.add_argument("--config", required=True, help="JSON config file or preset name")
    p.add_argument("--plot", action="store_true", help="also write SVG figures")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<name> or {DEFAULT_OUT}/<name>)")
    p.add_argument("--strict", action="store_true", help="abort on the first invariant violation")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a config over a range of one parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--vary", required=True, help="dotted.key=a:b[:step] or v1,v2,...")
    p.add_argument("--parallel", type=int, default=1, help="worker processes")
    p.add_argument("--out", help="output directory for sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance suite and print a pass/fail table")
    p.add_argument("--details", action="store_true", help="print every individual check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pe-check", help="persistent-excitation check on a trajectory CSV")
    p.add_argument("--record", required=True, help="trajectory.csv written by run")
    p.add_argument("--window", type=float, default=10.0, help="window length T [s]")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--stride", type=int, default=10, help="samples between window starts")
    p.add_argument("--since", type=float, default=0.0, help="ignore samples before this time")
    p.set_defaults(func=cmd_pe_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CircumnavError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
