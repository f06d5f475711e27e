"""Explicit-sensor reference calculation.

Sensors are real two-level systems added to the master equation with a
small finite coupling ``epsilon``. Their steady-state populations give S and
g2 directly, independent of the conditional-state ladder in
:mod:`uscsensor.cascade`.

Two coupling forms are available:

``"full"``
    ``epsilon * F * sx_k`` with ``F = i(a^dag - a) + 2 eta sx`` in the
    dressed basis, including its diagonal and raising parts.
``"rotating"``
    ``epsilon * (X' s+_k + X'^dag s-_k)``, the sensor absorbing only the
    positive-frequency part of the field.

The full form also registers virtual excitations of the dressed ground
state, a background the ladder leaves out by construction. It agrees with
the ladder on strong features; for weak g2 features the rotating form is the
like-for-like check.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cascade import DENOMINATOR_FLOOR, SCHEMA_VERSION, NoEmissionError, Scan, SensorGrid
from .fock import field_operator
from .liouville import Liouvillian, build_D_plus, build_X_plus, build_X_prime, liouvillian, steady_state
from .model import DressedModel

log = logging.getLogger(__name__)

MAX_SENSORS = 2
MAX_COMPOSITE_DIM = 160
EPSILON_MARGIN = 0.1
COUPLINGS = ("full", "rotating")

_SMINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1| on a sensor


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class SensorSpec:
    omega: float
    Gamma: float
    epsilon: float


def epsilon_bound(model: DressedModel, Gamma: float) -> float:
    """sqrt(Gamma * gamma_Q / 2) with gamma_Q the smallest nonzero rate."""
    gq = min(model.rates.smallest_decay(), Gamma)
    return float(np.sqrt(Gamma * gq / 2))


def check_epsilon(model: DressedModel, sensors: Sequence[SensorSpec]) -> None:
    for s in sensors:
        if s.Gamma <= 0:
            raise OracleError("sensor linewidth must be positive")
        bound = epsilon_bound(model, s.Gamma)
        if s.epsilon > EPSILON_MARGIN * bound:
            raise OracleError(
                f"epsilon={s.epsilon:g} is not small against sqrt(Gamma*gamma_Q/2)={bound:.3g}; "
                f"need epsilon <= {EPSILON_MARGIN * bound:.3g}"
            )


def _embed(op: np.ndarray, slot: int, dims: Sequence[int]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for i, d in enumerate(dims):
        out = np.kron(out, op if i == slot else np.eye(d))
    return out


def composite_liouvillian(
    model: DressedModel,
    sensors: Sequence[SensorSpec],
    coupling: str = "full",
    commutator_sign: int = -1,
) -> Liouvillian:
    """Generator on system (x) sensor_1 (x) ... with explicit sensor qubits."""
    if coupling not in COUPLINGS:
        raise OracleError(f"unknown coupling {coupling!r}; expected one of {COUPLINGS}")
    if not 1 <= len(sensors) <= MAX_SENSORS:
        raise OracleError(f"oracle supports 1..{MAX_SENSORS} sensors, got {len(sensors)}")
    n = model.n_levels
    dims = [n] + [2] * len(sensors)
    D = int(np.prod(dims))
    if D > MAX_COMPOSITE_DIM:
        raise OracleError(f"composite dimension {D} exceeds budget {MAX_COMPOSITE_DIM}")
    check_epsilon(model, sensors)

    basis = model.basis
    Xp = build_X_plus(basis, basis.params.eta, n)
    Dp = build_D_plus(basis, n)
    F = basis.to_dressed(field_operator(basis.space, basis.params.eta), n)
    Xprime = build_X_prime(basis, basis.params.eta, n)

    H = _embed(np.diag(basis.energies[:n]).astype(complex), 0, dims)
    c_ops = [
        np.sqrt(model.rates.kappa) * _embed(Xp, 0, dims),
        np.sqrt(model.rates.gamma) * _embed(Dp, 0, dims),
        np.sqrt(model.rates.P_inc) * _embed(Xp.conj().T, 0, dims),
    ]
    for k, s in enumerate(sensors, start=1):
        sm = _embed(_SMINUS, k, dims)
        sp = sm.conj().T
        H = H + s.omega * sp @ sm
        if coupling == "full":
            H = H + s.epsilon * _embed(F, 0, dims) @ (sp + sm)
        else:
            V = _embed(Xprime, 0, dims) @ sp
            H = H + s.epsilon * (V + V.conj().T)
        c_ops.append(np.sqrt(s.Gamma) * sm)
    return Liouvillian(liouvillian(H, c_ops, commutator_sign=commutator_sign), D, None, cache_size=1)


def sensor_populations(model: DressedModel, sensors: Sequence[SensorSpec],
                       coupling: str = "full") -> tuple[np.ndarray, list, complex]:
    """Composite steady state, single-sensor occupations, joint occupation."""
    L = composite_liouvillian(model, sensors, coupling)
    rho = steady_state(L)
    dims = [model.n_levels] + [2] * len(sensors)
    nums = [_embed(_SMINUS.conj().T @ _SMINUS, k, dims) for k in range(1, len(sensors) + 1)]
    pops = [float(np.real(np.trace(rho @ nk))) for nk in nums]
    joint = np.eye(rho.shape[0])
    for nk in nums:
        joint = joint @ nk
    return rho, pops, complex(np.trace(rho @ joint))


def oracle_spectrum(model: DressedModel, grid: SensorGrid, epsilon: float,
                    coupling: str = "full") -> Scan:
    """S(omega) = Gamma / (2 pi eps^2) <s^dag s> with one explicit sensor."""
    values = []
    for w in grid.frequencies:
        _, pops, _ = sensor_populations(model, [SensorSpec(w, grid.Gamma, epsilon)], coupling)
        values.append(grid.Gamma / (2 * np.pi * epsilon**2) * pops[0])
    meta = {"epsilon": epsilon, "coupling": coupling}
    return Scan("spectrum", grid, values, metadata=meta)


def oracle_g2(model: DressedModel, omega1: float, omega2: float, Gamma: float,
              epsilon: float, coupling: str = "full") -> float:
    sensors = [SensorSpec(omega1, Gamma, epsilon), SensorSpec(omega2, Gamma, epsilon)]
    _, pops, joint = sensor_populations(model, sensors, coupling)
    scale = epsilon**2
    if min(pops) / scale <= DENOMINATOR_FLOOR:
        raise NoEmissionError(f"no emission at ({omega1:.6g}, {omega2:.6g})")
    return float(joint.real / (pops[0] * pops[1]))


@dataclass
class PointComparison:
    omega: float
    perturbative: float
    oracle: float
    rel_err: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "perturbative": self.perturbative,
            "oracle": self.oracle,
            "rel_err": self.rel_err,
            "pass": self.passed,
        }


@dataclass
class DiscrepancyReport:
    points: list
    tolerance: float
    label: str = ""

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)

    @property
    def max_rel_err(self) -> float:
        return max((p.rel_err for p in self.points), default=0.0)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "label": self.label,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "max_rel_err": self.max_rel_err,
            "points": [p.to_dict() for p in self.points],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def compare_reports(perturbative: Scan, oracle: Scan, tolerance: float,
                    at: Sequence[float] | None = None, label: str = "") -> DiscrepancyReport:
    """Point-wise error of ``perturbative`` relative to ``oracle`` on a shared grid.

    ``at`` restricts the comparison to the grid points nearest the given
    frequencies (e.g. peak positions); by default every point is compared.
    """
    a = np.asarray(perturbative.grid.frequencies)
    b = np.asarray(oracle.grid.frequencies)
    if a.shape != b.shape or not np.allclose(a, b, rtol=0, atol=1e-12):
        raise ValueError("scans are on different grids")
    idx = range(len(a)) if at is None else sorted({int(np.argmin(np.abs(a - w))) for w in at})
    points = []
    for i in idx:
        p, o = perturbative.values[i], oracle.values[i]
        if p is None or o is None:
            points.append(PointComparison(float(a[i]), p, o, float("inf"), False))
            continue
        scale = abs(o) if o != 0 else abs(p)
        err = 0.0 if scale == 0 else abs(p - o) / scale
        points.append(PointComparison(float(a[i]), float(p), float(o), err, err <= tolerance))
    return DiscrepancyReport(points, tolerance, label)
