"""Command-line entry point: ``omheat run | selfcheck | scenarios``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import SCENARIO_NOTES, SCENARIOS, ConfigError, load_config
from .sweep import SweepIOError, emit_csv, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECKS = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="omheat",
        description="Steady-state heat currents and entropy production of a "
                    "dissipative optomechanical system.")
    ap.add_argument("--version", action="version", version=f"omheat {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="more logging (repeat for debug output)")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep the coupling strength and write CSV")
    run.add_argument("--config", required=True, help="configuration file")
    run.add_argument("--out", help="output CSV path ('-' for stdout); overrides the config")
    run.add_argument("--threads", type=int,
                     help="worker threads (default: $OMHEAT_THREADS or the CPU count)")

    chk = sub.add_parser("selfcheck", help="compare numerics with closed forms and laws")
    chk.add_argument("--config", required=True, help="configuration file")

    sub.add_parser("scenarios", help="list the parameter presets")
    return ap


def _cmd_run(args) -> int:
    if args.threads is not None and args.threads < 1:
        raise ValueError("--threads must be >= 1")
    config = load_config(args.config)
    out = args.out or config.output or "-"
    rows = run_sweep(config, threads=args.threads)
    n_bad = sum(not r.converged for r in rows)
    if n_bad:
        logging.getLogger("omheat").warning("%d of %d points did not converge", n_bad, len(rows))
    emit_csv(rows, out, config)
    if n_bad == len(rows):
        print("error: the solver failed at every point", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_selfcheck(args) -> int:
    from .selfcheck import run_selfcheck

    config = load_config(args.config)
    report = run_selfcheck(config, echo=print)
    return EXIT_OK if report.ok else EXIT_CHECKS


def _cmd_scenarios(_args) -> int:
    for name, preset in SCENARIOS.items():
        settings = ", ".join(f"{k}={v:g}" for k, v in preset.items())
        print(f"{name:7s} {SCENARIO_NOTES[name]}: {settings}")
    print(f"{'custom':7s} {SCENARIO_NOTES['custom']}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "selfcheck": _cmd_selfcheck, "scenarios": _cmd_scenarios}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SweepIOError, ValueError) as exc:
        # bad --threads / $OMHEAT_THREADS, unwritable output
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
