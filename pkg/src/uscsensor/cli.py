"""Command-line driver: ``uscsensor --config run.yaml --mode spectrum --out runs/fig2b``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import oracle as orc
from .cascade import SCHEMA_VERSION, Scan, SensorGrid, correlation_scan, power_spectrum
from .config import MODES, ConfigError, RunConfig, load_config, parse_number
from .fock import build_space, field_operator
from .model import DressedModel, build_model
from .peaks import find_peaks, resolve_symbolic_frequency
from .rabi import ConvergenceError, RabiParams, energy_sweep, transition_table

log = logging.getLogger("uscsensor")


def _model(cfg: RunConfig, params: RabiParams | None = None) -> DressedModel:
    return build_model(params or cfg.params, cfg.rates, cfg.n_fock, cfg.n_levels)


def _grid(cfg: RunConfig) -> SensorGrid:
    g = cfg.grid
    return SensorGrid.uniform(g["start"], g["stop"], g["step"], cfg.rates.Gamma)


def _resolve(value, model: DressedModel, field: str) -> float:
    if isinstance(value, str):
        try:
            return resolve_symbolic_frequency(value, model.basis, model.n_levels)
        except ValueError as exc:
            raise ConfigError(f"{field}: {exc}") from None
    return float(value)


def _peaks(cfg: RunConfig, model: DressedModel, scan: Scan):
    n = min(cfg.peaks["assign_levels"], model.n_levels)
    table = transition_table(model.basis, field_operator(model.space, model.params.eta), n)
    return find_peaks(scan.omega, scan.values, scan.grid.Gamma, table,
                      prominence_floor=cfg.peaks["floor"], shoulders=cfg.peaks["shoulders"])


def _metadata(cfg: RunConfig, params: RabiParams | None = None) -> dict:
    p = params or cfg.params
    return {
        "params": {"g": p.g, "theta": p.theta, "omega_q": p.omega_q, "omega_c": p.omega_c},
        "rates": {"kappa": cfg.rates.kappa, "gamma": cfg.rates.gamma,
                  "Gamma": cfg.rates.Gamma, "P_inc": cfg.rates.P_inc},
        "n_fock": cfg.n_fock,
        "n_levels": cfg.n_levels,
    }


def _write_json(path: Path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def run_energy_sweep(cfg: RunConfig) -> int:
    gg = cfg.g_grid
    grid = np.linspace(gg["start"], gg["stop"], gg["num"])
    sweep = energy_sweep(build_space(cfg.n_fock), cfg.params.omega_q, cfg.params.theta,
                         grid, n_levels=8, omega_c=cfg.params.omega_c)
    sweep.write_csv(cfg.out / "energies.csv")
    return 0


def run_spectrum(cfg: RunConfig) -> int:
    model = _model(cfg)
    grid = _grid(cfg)
    scan = power_spectrum(model.L0, model.x_prime, grid, workers=cfg.workers,
                          metadata=_metadata(cfg))
    peaks = _peaks(cfg, model, scan)
    scan.write_csv(cfg.out / "spectrum.csv")
    scan.write_json(cfg.out / "spectrum.json", peaks)
    _write_json(cfg.out / "peaks.json", {"peaks": [p.to_dict() for p in peaks]})
    return 0


def run_theta_map(cfg: RunConfig) -> int:
    tg = cfg.theta_grid
    thetas = np.linspace(tg["start"], tg["stop"], tg["num"])
    grid = _grid(cfg)
    per_theta = []
    with open(cfg.out / "spectrum_theta_map.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "omega_1", "value"])
        for theta in thetas:
            p = RabiParams(g=cfg.params.g, theta=float(theta),
                           omega_q=cfg.params.omega_q, omega_c=cfg.params.omega_c)
            model = _model(cfg, p)
            scan = power_spectrum(model.L0, model.x_prime, grid, workers=cfg.workers)
            for x, v in zip(grid.frequencies, scan.values):
                w.writerow([f"{theta:.9g}", f"{x:.9g}", f"{v:.9g}"])
            per_theta.append({"theta": float(theta),
                              "peaks": [pk.to_dict() for pk in _peaks(cfg, model, scan)]})
            log.info("theta=%.4f done", theta)
    _write_json(cfg.out / "peaks.json", {"theta_map": per_theta, "metadata": _metadata(cfg)})
    return 0


def run_correlation(cfg: RunConfig) -> int:
    model = _model(cfg)
    names = ["w2"] if cfg.mode == "g2_scan" else ["w2", "w3"]
    fixed = [_resolve(cfg.fixed[n], model, f"fixed.{n}") for n in names]
    meta = _metadata(cfg)
    meta["fixed_symbols"] = {n: cfg.fixed[n] for n in names}
    scan = correlation_scan(model.L0, model.x_prime, _grid(cfg), fixed,
                            workers=cfg.workers, metadata=meta)
    peaks = _peaks(cfg, model, scan)
    stem = "g2" if cfg.mode == "g2_scan" else "g3"
    scan.write_csv(cfg.out / f"{stem}.csv")
    scan.write_json(cfg.out / f"{stem}.json", peaks)
    _write_json(cfg.out / "peaks.json", {"peaks": [p.to_dict() for p in peaks]})
    return 0


def oracle_check(cfg: RunConfig) -> dict:
    """Cross-check the ladder against explicit sensors; returns the report payload."""
    model = _model(cfg)
    o = cfg.oracle
    eps, coupling, Gamma = o["epsilon"], o["coupling"], cfg.rates.Gamma
    try:
        orc.check_epsilon(model, [orc.SensorSpec(0.0, Gamma, eps)])
    except orc.OracleError as exc:
        raise ConfigError(f"oracle.epsilon: {exc}") from None

    scan = power_spectrum(model.L0, model.x_prime, _grid(cfg), workers=cfg.workers)
    maxima = [p for p in _peaks(cfg, model, scan) if p.kind == "maximum"]
    top = sorted(maxima, key=lambda p: -p.height)[: int(o["spectrum_peaks"])]
    peak_grid = SensorGrid(tuple(sorted(p.omega_peak for p in top)), Gamma)
    pert = power_spectrum(model.L0, model.x_prime, peak_grid)
    ref = orc.oracle_spectrum(model, peak_grid, eps, coupling)
    spectrum_report = orc.compare_reports(pert, ref, o["spectrum_tolerance"], label="spectrum peaks")

    w_ref = _resolve(o["g2_reference"], model, "oracle.g2_reference")
    points = []
    for sym in o["g2_points"]:
        w1 = _resolve(sym, model, "oracle.g2_points")
        p = correlation_scan(model.L0, model.x_prime, SensorGrid((w1,), Gamma), [w_ref]).values[0]
        r = orc.oracle_g2(model, w1, w_ref, Gamma, eps, coupling)
        err = abs(p - r) / abs(r)
        points.append(orc.PointComparison(w1, p, r, err, err <= o["g2_tolerance"]))
    g2_report = orc.DiscrepancyReport(points, o["g2_tolerance"], label=f"g2(w1, {o['g2_reference']})")

    w_s = _resolve(o["scaling_at"], model, "oracle.scaling_at")
    _, p1, _ = orc.sensor_populations(model, [orc.SensorSpec(w_s, Gamma, eps)], coupling)
    _, p2, _ = orc.sensor_populations(model, [orc.SensorSpec(w_s, Gamma, eps / 2)], coupling)
    ratio = p1[0] / p2[0]
    scaling_ok = abs(ratio - 4) <= 4 * o["scaling_tolerance"]

    ok = spectrum_report.passed and g2_report.passed and scaling_ok
    return {
        "pass": ok,
        "epsilon": eps,
        "coupling": coupling,
        "spectrum": spectrum_report.to_dict(),
        "g2": g2_report.to_dict(),
        "epsilon_scaling": {"omega": w_s, "ratio": ratio, "expected": 4.0,
                            "tolerance": o["scaling_tolerance"], "pass": scaling_ok},
        "metadata": _metadata(cfg),
    }


def run_oracle_check(cfg: RunConfig) -> int:
    report = oracle_check(cfg)
    _write_json(cfg.out / "oracle_report.json", report)
    log.info("oracle check %s", "passed" if report["pass"] else "FAILED")
    return 0 if report["pass"] else 1


RUNNERS = {
    "energy_sweep": run_energy_sweep,
    "spectrum": run_spectrum,
    "spectrum_theta_map": run_theta_map,
    "g2_scan": run_correlation,
    "g3_scan": run_correlation,
    "oracle_check": run_oracle_check,
}


def run(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    with open(cfg.out / "config.yaml", "w") as fh:
        yaml.safe_dump(cfg.snapshot(), fh, sort_keys=True)
    return RUNNERS[cfg.mode](cfg)


def _fixed_pair(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="uscsensor",
        description="Frequency-resolved emission spectra and N-photon correlations "
                    "of an ultrastrongly coupled qubit-cavity system.",
    )
    p.add_argument("--config", type=Path, help="YAML run configuration")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--theta", help="mixing angle, e.g. 1.5708 or pi/6")
    p.add_argument("--g", help="coupling strength in units of omega_c")
    p.add_argument("--n-fock", type=int)
    p.add_argument("--out", type=Path, help="run directory")
    p.add_argument("--grid-start")
    p.add_argument("--grid-stop")
    p.add_argument("--grid-step")
    p.add_argument("--fixed", type=_fixed_pair, action="append", default=[],
                   metavar="wN=SYMBOL", help="fixed sensor, e.g. w2=w10 or w3=0.70")
    p.add_argument("--oracle-epsilon")
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def overrides_from_args(args) -> dict:
    o: dict = {}

    def put(section, key, value):
        if value is not None:
            o.setdefault(section, {})[key] = value

    if args.mode:
        o["mode"] = args.mode
    if args.out is not None:
        o["out"] = str(args.out)
    put("model", "theta", args.theta)
    put("model", "g", args.g)
    put("numerics", "n_fock", args.n_fock)
    put("numerics", "workers", args.workers)
    put("grid", "start", args.grid_start)
    put("grid", "stop", args.grid_stop)
    put("grid", "step", args.grid_step)
    put("oracle", "epsilon", args.oracle_epsilon)
    for k, v in args.fixed:
        o.setdefault("fixed", {})[k] = v if v.startswith("w") else parse_number(v, f"--fixed {k}")
    return o


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, overrides_from_args(args))
        return run(cfg)
    except (ConfigError, ConvergenceError) as exc:
        print(f"uscsensor: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
