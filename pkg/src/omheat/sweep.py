"""Coupling-strength sweeps and their CSV form."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from . import __version__
from .config import RunConfig
from .generators import build_generator
from .steady import SteadyStateError, converge_cutoffs, steady_state
from .thermo import ThermoError, entropy_production_rate, first_law_check

log = logging.getLogger(__name__)

THREADS_ENV = "OMHEAT_THREADS"
HEADER = ("model,sidebands,g,n_c,n_m,J_c,J_m,xi,first_law_residual,"
          "solver_residual,converged")


class SweepIOError(OSError):
    pass


@dataclass(frozen=True)
class SweepRow:
    """One point of a sweep.  Failed points carry NaN values and converged=False."""

    model: str
    sidebands: int
    g: float
    n_c: int
    n_m: int
    J_c: float
    J_m: float
    xi: float
    first_law_residual: float
    solver_residual: float
    converged: bool


assert ",".join(f.name for f in fields(SweepRow)) == HEADER


def thread_count() -> int:
    """Worker count: ``$OMHEAT_THREADS`` if set, else the usable CPU count."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return n
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # not available on every platform
        return os.cpu_count() or 1


def _gen_kwargs(config: RunConfig) -> dict:
    return {"mechanical_jump": config.gme_mechanical_jump} if config.model == "GME" else {}


def solve_point(config: RunConfig, g: float) -> SweepRow:
    """Steady-state thermodynamics at one coupling strength.

    Never raises for numerical trouble: the failure is logged and the row is
    marked unconverged.
    """
    params = config.params.replace(g=float(g))
    sidebands = config.model_sidebands or None
    dims = config.dims
    nan = math.nan
    try:
        if config.auto_converge:
            dims = converge_cutoffs(params, config.model, sidebands, start_dims=config.dims,
                                    rel_tol=config.rel_tol,
                                    memory_budget_mb=config.memory_budget_mb,
                                    **_gen_kwargs(config)).dims
        gen = build_generator(params, dims, config.model, sidebands, **_gen_kwargs(config))
        rho = steady_state(gen, tol=config.solver_tol)
        rep = entropy_production_rate(gen, rho, steady=True)
    except (SteadyStateError, ThermoError, ValueError, MemoryError) as exc:
        log.warning("g=%r: %s: %s", g, type(exc).__name__, exc)
        return SweepRow(config.model, config.model_sidebands, float(g), dims.n_c, dims.n_m,
                        nan, nan, nan, nan, nan, False)
    ok = first_law_check(rep)
    if not ok:
        log.warning("g=%r: first-law residual %.3g above tolerance", g, rep.first_law_residual)
    return SweepRow(config.model, config.model_sidebands, float(g), dims.n_c, dims.n_m,
                    rep.J_c, rep.J_m, rep.xi, rep.first_law_residual,
                    float(rho.info["residual"]), ok)


def run_sweep(config: RunConfig, threads: int | None = None) -> list[SweepRow]:
    """Solve every point of the g grid; rows come back ordered by g."""
    gs = [float(g) for g in config.g_values()]
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(gs) == 1:
        rows = [solve_point(config, g) for g in gs]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, len(gs))) as pool:
            rows = list(pool.map(lambda g: solve_point(config, g), gs))
    return sorted(rows, key=lambda r: r.g)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest string that round-trips
    return str(value)


def provenance_line(config: RunConfig | None) -> str:
    items = [f"artifact=omheat {__version__}"]
    if config is not None:
        items += [f"{k}={_fmt(v)}" for k, v in config.describe().items()]
    return "# " + "; ".join(items)


def format_csv(rows, config: RunConfig | None = None) -> str:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    buf = io.StringIO()
    buf.write(provenance_line(config) + "\n")
    buf.write(HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_fmt(v) for v in astuple(row)])
    return buf.getvalue()


def emit_csv(rows, path, config: RunConfig | None = None) -> None:
    """Write rows as CSV to ``path`` (``-`` for standard output).

    The file is written only after the content is fully formatted, so an
    empty ``rows`` raises without touching the filesystem.
    """
    text = format_csv(rows, config)
    if str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise SweepIOError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


_PARSERS = {"model": str, "sidebands": int, "n_c": int, "n_m": int,
            "converged": lambda s: {"true": True, "false": False}[s]}


def read_csv(path) -> tuple[str, list[SweepRow]]:
    """Inverse of :func:`emit_csv`; returns the provenance line and the rows."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SweepIOError(exc.errno, f"cannot read {path}: {exc.strerror}") from exc
    if len(lines) < 2 or not lines[0].startswith("#") or lines[1] != HEADER:
        raise ValueError(f"{path}: not an omheat sweep file")
    rows = []
    for rec in csv.reader(lines[2:]):
        kw = {f.name: _PARSERS.get(f.name, float)(v) for f, v in zip(fields(SweepRow), rec)}
        rows.append(SweepRow(**kw))
    return lines[0], rows


__all__ = ["HEADER", "SweepIOError", "SweepRow", "emit_csv", "format_csv", "read_csv",
           "run_sweep", "solve_point", "thread_count"]
