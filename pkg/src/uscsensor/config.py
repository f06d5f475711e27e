"""Run configuration: a YAML file with nested sections, overridden by flags."""

from __future__ import annotations

import copy
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .liouville import RateSet
from .model import DEFAULT_N_FOCK, DEFAULT_N_LEVELS
from .rabi import RabiParams

MODES = ("energy_sweep", "spectrum", "spectrum_theta_map", "g2_scan", "g3_scan", "oracle_check")

DEFAULTS = {
    "mode": "spectrum",
    "model": {"g": 0.3, "theta": "pi/2", "omega_q": 1.0, "omega_c": 1.0},
    "rates": {"kappa": 5e-3, "gamma": 5e-3, "Gamma": 5e-3, "P_inc": 5e-4},
    "numerics": {"n_fock": DEFAULT_N_FOCK, "n_levels": DEFAULT_N_LEVELS, "workers": 1},
    "grid": {"start": 0.0, "stop": 2.5, "step": 1e-3},
    "theta_grid": {"start": 0.0, "stop": "pi", "num": 37},
    "g_grid": {"start": 0.0, "stop": 0.5, "num": 51},
    "fixed": {},
    "peaks": {"floor": 1e-6, "shoulders": True, "assign_levels": 8},
    "oracle": {
        "epsilon": 1e-4,
        "coupling": "rotating",
        "spectrum_peaks": 3,
        "spectrum_tolerance": 0.02,
        "g2_points": ["w31", "w41", "w32", "w42", "w20"],
        "g2_reference": "w10",
        "g2_tolerance": 0.05,
        "scaling_at": "w10",
        "scaling_tolerance": 0.05,
    },
    "out": "run",
}

_PI_EXPR = re.compile(r"^\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


def parse_number(value, path: str) -> float:
    """Float from a number or a string such as ``"5e-3"``, ``"pi/6"`` or ``"3*pi/4"``."""
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
        m = _PI_EXPR.match(value)
        if m:
            coef = m.group(1)
            c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            div = float(m.group(2)) if m.group(2) else 1.0
            return c * math.pi / div
    raise ConfigError(f"{path}: cannot read {value!r} as a number")


def _merge(base: dict, extra: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in (extra or {}).items():
        where = f"{path}.{k}" if path else k
        if k not in base:
            raise ConfigError(f"{where}: unknown field")
        if isinstance(base[k], dict) and k != "fixed":
            if not isinstance(v, dict):
                raise ConfigError(f"{where}: expected a section")
            out[k] = _merge(base[k], v, where)
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    mode: str
    params: RabiParams
    rates: RateSet
    n_fock: int
    n_levels: int
    workers: int
    grid: dict
    theta_grid: dict
    g_grid: dict
    fixed: dict
    peaks: dict
    oracle: dict
    out: Path
    raw: dict = field(repr=False, default_factory=dict)

    def snapshot(self) -> dict:
        """Resolved configuration as plain data, for the run directory."""
        snap = copy.deepcopy(self.raw)
        snap["resolved"] = {"model": asdict(self.params), "rates": asdict(self.rates)}
        return snap


def _positive_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{path}: expected a positive integer, got {value!r}")
    return value


def build_config(data: dict | None = None, overrides: dict | None = None) -> RunConfig:
    raw = _merge(DEFAULTS, data or {})
    raw = _merge(raw, overrides or {})

    mode = raw["mode"]
    if mode not in MODES:
        raise ConfigError(f"mode: {mode!r} is not one of {', '.join(MODES)}")
    m = {k: parse_number(v, f"model.{k}") for k, v in raw["model"].items()}
    try:
        params = RabiParams(g=m["g"], theta=m["theta"], omega_q=m["omega_q"], omega_c=m["omega_c"])
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None
    r = {k: parse_number(v, f"rates.{k}") for k, v in raw["rates"].items()}
    try:
        rates = RateSet(**r)
    except ValueError as exc:
        raise ConfigError(f"rates: {exc}") from None
    if rates.Gamma <= 0 and mode != "energy_sweep":
        raise ConfigError("rates.Gamma: sensor linewidth must be positive")

    num = raw["numerics"]
    n_fock = _positive_int(num["n_fock"], "numerics.n_fock")
    n_levels = _positive_int(num["n_levels"], "numerics.n_levels")
    workers = _positive_int(num["workers"], "numerics.workers")

    grid = {k: parse_number(v, f"grid.{k}") for k, v in raw["grid"].items()}
    if grid["step"] <= 0:
        raise ConfigError("grid.step: must be positive")
    if grid["stop"] < grid["start"]:
        raise ConfigError("grid.stop: must not be below grid.start")
    theta_grid = {k: parse_number(v, f"theta_grid.{k}") for k, v in raw["theta_grid"].items()}
    g_grid = {k: parse_number(v, f"g_grid.{k}") for k, v in raw["g_grid"].items()}
    for name, gg in (("theta_grid", theta_grid), ("g_grid", g_grid)):
        if gg["num"] < 1 or gg["num"] != int(gg["num"]):
            raise ConfigError(f"{name}.num: grid is empty")
        gg["num"] = int(gg["num"])

    fixed = {}
    for k, v in (raw["fixed"] or {}).items():
        if k not in ("w2", "w3"):
            raise ConfigError(f"fixed.{k}: only w2 and w3 can be fixed")
        fixed[k] = v if isinstance(v, str) and v.strip().startswith("w") else parse_number(v, f"fixed.{k}")
    need = {"g2_scan": ["w2"], "g3_scan": ["w2", "w3"]}.get(mode, [])
    for k in need:
        if k not in fixed:
            raise ConfigError(f"fixed.{k}: required for mode {mode}")

    peaks = dict(raw["peaks"])
    peaks["floor"] = parse_number(peaks["floor"], "peaks.floor")
    oracle = dict(raw["oracle"])
    for key in ("epsilon", "spectrum_tolerance", "g2_tolerance", "scaling_tolerance"):
        oracle[key] = parse_number(oracle[key], f"oracle.{key}")
    if oracle["epsilon"] <= 0:
        raise ConfigError("oracle.epsilon: must be positive")
    if oracle["coupling"] not in ("full", "rotating"):
        raise ConfigError(f"oracle.coupling: {oracle['coupling']!r} is not 'full' or 'rotating'")

    return RunConfig(
        mode=mode, params=params, rates=rates, n_fock=n_fock, n_levels=n_levels,
        workers=workers, grid=grid, theta_grid=theta_grid, g_grid=g_grid, fixed=fixed,
        peaks=peaks, oracle=oracle, out=Path(str(raw["out"])), raw=raw,
    )


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    data = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    return build_config(data, overrides)
