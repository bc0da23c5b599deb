"""Run configuration: a flat ``key = value`` file with scenario presets.

Grammar: one ``key = value`` per line, blank lines ignored, ``#`` starts a
comment that runs to the end of the line.  Keys are case-sensitive and must
appear at most once.  A scenario preset fills in every parameter the file does
not set itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fock import DimensionError, SystemDims
from .generators import GME_SIDEBANDS
from .params import ParameterError, PhysicalParams

MODEL_NAMES = {"sme": "SME", "dsme": "DSME", "gme": "GME"}

# parameter values shared by every preset: a circuit-QED device with a 10 GHz
# microwave resonator (all rates in units of the optical frequency)
DEVICE = {"omega_c_ghz": 10.0, "omega_m": 0.06, "kappa_c": 0.02, "kappa_m": 0.005}

SCENARIOS = {
    "fig2": dict(DEVICE, T_c_mK=106.0, T_m_mK=101.0),
    "fig3": dict(DEVICE, T_c_mK=106.0, T_m_mK=106.0),
    "fig4": dict(DEVICE, T_c_mK=101.0, T_m_mK=106.0),
}
SCENARIO_NOTES = {
    "fig2": "optical bath hotter than mechanical bath",
    "fig3": "equal bath temperatures",
    "fig4": "mechanical bath hotter than optical bath",
    "custom": "no preset; T_c_mK and T_m_mK must be given",
}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(*options):
    def parse(text):
        t = text.lower()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return t
    return parse


def _opt_path(text: str):
    return Path(text) if text else None


# key -> (parser, default); None defaults mean "not set"
KEYS = {
    "scenario": (_choice("fig2", "fig3", "fig4", "custom"), "custom"),
    "model": (_choice(*MODEL_NAMES), "gme"),
    "sidebands": (int, None),
    "omega_c_ghz": (float, None),
    "omega_m": (float, None),
    "kappa_c": (float, None),
    "kappa_m": (float, None),
    "T_c_mK": (float, None),
    "T_m_mK": (float, None),
    "gm0": (float, None),
    "gme_mechanical_jump": (_choice("dressed", "literal"), "dressed"),
    "n_c": (int, None),
    "n_m": (int, None),
    "auto_converge": (_bool, True),
    "rel_tol": (float, 1e-4),
    "memory_budget_mb": (float, 4096.0),
    "g_start": (float, 0.0),
    "g_stop": (float, 0.1),
    "g_points": (int, 21),
    "g_spacing": (_choice("linear", "log"), "linear"),
    "solver_tol": (float, 1e-9),
    "output": (_opt_path, None),
}
# starting cutoffs for auto-convergence, and fixed cutoffs otherwise
AUTO_START = SystemDims(6, 25)
FIXED_DEFAULT = SystemDims(6, 80)


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    model: str = "GME"
    sidebands: int = 4
    scenario: str = "custom"
    dims: SystemDims = FIXED_DEFAULT
    auto_converge: bool = True
    rel_tol: float = 1e-4
    memory_budget_mb: float = 4096.0
    g_start: float = 0.0
    g_stop: float = 0.1
    g_points: int = 21
    g_spacing: str = "linear"
    solver_tol: float = 1e-9
    gme_mechanical_jump: str = "dressed"
    output: Path | None = None
    source: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.model not in MODEL_NAMES.values():
            raise ConfigError(f"unknown model {self.model!r}")
        if self.model == "GME" and self.sidebands not in GME_SIDEBANDS:
            raise ConfigError(f"sidebands must be one of {GME_SIDEBANDS} for gme, got {self.sidebands}")
        if self.g_start < 0:
            raise ConfigError("g_start must be >= 0")
        if self.g_points < 1:
            raise ConfigError("g_points must be >= 1")
        if self.g_stop < self.g_start:
            raise ConfigError("g_stop must be >= g_start")
        if self.g_spacing == "log" and self.g_start <= 0:
            raise ConfigError("log spacing needs g_start > 0")
        for name in ("rel_tol", "solver_tol", "memory_budget_mb"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")

    def g_values(self) -> np.ndarray:
        if self.g_points == 1:
            return np.array([self.g_start])
        if self.g_spacing == "log":
            return np.geomspace(self.g_start, self.g_stop, self.g_points)
        return np.linspace(self.g_start, self.g_stop, self.g_points)

    @property
    def model_sidebands(self) -> int:
        """Sideband count as recorded in output (0 for the lab-frame models)."""
        return self.sidebands if self.model == "GME" else 0

    def describe(self) -> dict:
        """Flat record of every setting, for provenance lines."""
        p = self.params
        return {
            "scenario": self.scenario, "model": self.model, "sidebands": self.model_sidebands,
            "omega_c_phys": p.omega_c_phys, "omega_m": p.omega_m, "kappa_c": p.kappa_c,
            "kappa_m": p.kappa_m, "T_c": p.T_c, "T_m": p.T_m,
            "gm0": "default" if p.gm0_override is None else p.gm0_override,
            "gme_mechanical_jump": self.gme_mechanical_jump,
            "auto_converge": self.auto_converge, "n_c": self.dims.n_c, "n_m": self.dims.n_m,
            "rel_tol": self.rel_tol, "memory_budget_mb": self.memory_budget_mb,
            "g_start": self.g_start, "g_stop": self.g_stop, "g_points": self.g_points,
            "g_spacing": self.g_spacing, "solver_tol": self.solver_tol,
        }


def parse_config(text: str, path=None) -> RunConfig:
    """Parse configuration text; see the module docstring for the grammar."""
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno, path)
        try:
            values[key] = KEYS[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno, path) from None
        lines[key] = lineno
    return _build(values, lines, path)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}", None, path) from None
    return parse_config(text, path)


def _build(values: dict, lines: dict, path) -> RunConfig:
    def get(key):
        return values[key] if key in values else KEYS[key][1]

    scenario = get("scenario")
    merged = dict(SCENARIOS.get(scenario, DEVICE))
    merged.update({k: v for k, v in values.items() if v is not None})

    def err(msg, *keys):
        line = min((lines[k] for k in keys if k in lines), default=None)
        return ConfigError(msg, line, path)

    for key in ("T_c_mK", "T_m_mK"):
        if key not in merged:
            raise err(f"{key} is required for scenario {scenario!r}", "scenario")
    try:
        params = PhysicalParams(
            omega_c_phys=2 * math.pi * merged["omega_c_ghz"] * 1e9,
            omega_m=merged["omega_m"], kappa_c=merged["kappa_c"], kappa_m=merged["kappa_m"],
            T_c=merged["T_c_mK"] * 1e-3, T_m=merged["T_m_mK"] * 1e-3,
            gm0_override=merged.get("gm0"))
    except ParameterError as exc:
        raise err(str(exc), *DEVICE, "T_c_mK", "T_m_mK", "gm0") from None

    model = MODEL_NAMES[get("model")]
    sidebands = get("sidebands")
    if sidebands is None:
        sidebands = 4
    elif model != "GME":
        raise err("sidebands only applies to model = gme", "sidebands")
    auto = get("auto_converge")
    default_dims = AUTO_START if auto else FIXED_DEFAULT
    try:
        dims = SystemDims(default_dims.n_c if get("n_c") is None else get("n_c"),
                          default_dims.n_m if get("n_m") is None else get("n_m"))
    except DimensionError as exc:
        raise err(str(exc), "n_c", "n_m") from None
    try:
        return RunConfig(
            params=params, model=model, sidebands=sidebands, scenario=scenario, dims=dims,
            auto_converge=auto, rel_tol=get("rel_tol"), memory_budget_mb=get("memory_budget_mb"),
            g_start=get("g_start"), g_stop=get("g_stop"), g_points=get("g_points"),
            g_spacing=get("g_spacing"), solver_tol=get("solver_tol"),
            gme_mechanical_jump=get("gme_mechanical_jump"), output=get("output"),
            source=None if path is None else Path(path))
    except ConfigError as exc:
        # attach the line of the offending key when we can tell which it is
        msg = str(exc)
        keys = [k for k in lines if k in msg]
        raise err(msg, *keys) if keys else ConfigError(msg, None, path) from None
