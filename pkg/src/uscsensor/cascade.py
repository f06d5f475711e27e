"""Frequency-resolved emission from the perturbative sensor ladder.

``N`` identical sensors of linewidth ``Gamma`` are attached to the system
operator ``X'``. The joint steady state is split into conditional blocks
``rho[m, m']`` labelled by sensor bra/ket occupations ``m, m' in {0,1}^N``
and rescaled by ``eps**weight`` so the coupling never appears. Each block
solves

    (L0 - z) rho[m, m'] = i ( sum_{k: m_k=1}  X' rho[m - e_k, m']
                             - sum_{k: m'_k=1} rho[m, m' - e_k] X'^dag )

    z = i sum_k (m_k - m'_k) omega_k + weight(m, m') * Gamma / 2

in order of increasing weight, starting from ``rho[0, 0] = rho_ss``.
Blocks related by ``rho[m', m] = rho[m, m']^dag`` are solved once.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .liouville import Liouvillian, devectorize, shifted_solve, vec_dagger, vectorize

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
DENOMINATOR_FLOOR = 1e-30
IMAG_TOL = 1e-8

Occupation = tuple
Index = tuple  # (m, m')


class NoEmissionError(ArithmeticError):
    """A sensor population fell below the numerical floor."""


@dataclass(frozen=True)
class SensorGrid:
    """Strictly increasing sensor frequencies sharing one linewidth."""

    frequencies: tuple
    Gamma: float

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.size == 0:
            raise ValueError("sensor grid is empty")
        if self.Gamma <= 0:
            raise ValueError("sensor linewidth Gamma must be positive")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("sensor frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", tuple(float(x) for x in f))

    @classmethod
    def uniform(cls, start: float, stop: float, step: float, Gamma: float) -> "SensorGrid":
        if step <= 0:
            raise ValueError("grid step must be positive")
        if stop < start:
            raise ValueError("grid stop must not be below start")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return cls(tuple(start + step * np.arange(n)), Gamma)

    def __len__(self):
        return len(self.frequencies)

    @property
    def max_step(self) -> float:
        return float(np.max(np.diff(self.frequencies))) if len(self) > 1 else 0.0

    def check_resolution(self) -> None:
        """Peak resolution needs steps no coarser than Gamma / 5."""
        if self.max_step > self.Gamma / 5 * (1 + 1e-9):
            raise ValueError(
                f"grid step {self.max_step:.3g} exceeds Gamma/5 = {self.Gamma / 5:.3g}"
            )


def index_weight(m: Occupation, mp: Occupation) -> int:
    return sum(m) + sum(mp)


def ladder_shift(m: Occupation, mp: Occupation, freqs: Sequence[float], Gamma: float) -> complex:
    detuning = sum((a - b) * w for a, b, w in zip(m, mp, freqs))
    return 1j * detuning + 0.5 * index_weight(m, mp) * Gamma


def _lowered(m: Occupation, k: int) -> Occupation:
    return m[:k] + (0,) + m[k + 1:]


@dataclass
class ConditionalStateLadder:
    """Rescaled conditional blocks of an ``N``-sensor steady state."""

    frequencies: tuple
    Gamma: float
    entries: dict = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.frequencies)

    def __getitem__(self, key: Index) -> np.ndarray:
        m, mp = key
        return self.entries[(tuple(m), tuple(mp))]

    def matrix(self, m, mp) -> np.ndarray:
        return devectorize(self[(m, mp)])

    def trace(self, m, mp) -> complex:
        return complex(np.trace(self.matrix(m, mp)))

    def population(self, k: int) -> float:
        """Rescaled single-sensor occupation Tr rho[e_k, e_k]."""
        e = tuple(int(i == k) for i in range(self.order))
        return self.trace(e, e).real

    def joint(self) -> complex:
        ones = (1,) * self.order
        return self.trace(ones, ones)


def all_indices(order: int) -> list:
    occ = list(itertools.product((0, 1), repeat=order))
    idx = [(m, mp) for m in occ for mp in occ]
    idx.sort(key=lambda t: (index_weight(*t), t))
    return idx


def acs_ladder(
    L0: Liouvillian,
    x_prime: np.ndarray,
    sensor_freqs: Sequence[float],
    Gamma: float,
    rho_ss: np.ndarray | None = None,
    reuse: ConditionalStateLadder | None = None,
) -> ConditionalStateLadder:
    """Solve every conditional block for sensors at ``sensor_freqs``.

    Blocks of ``reuse`` are copied when they involve only sensors whose
    frequencies are unchanged, which is what makes one-sensor scans cheap.
    """
    freqs = tuple(float(w) for w in sensor_freqs)
    N = len(freqs)
    if N < 1:
        raise ValueError("need at least one sensor")
    if Gamma <= 0:
        raise ValueError("sensor linewidth Gamma must be positive")
    X = np.asarray(x_prime, dtype=complex)
    Xd = X.conj().T
    d = L0.dim
    if X.shape != (d, d):
        raise ValueError(f"X' has shape {X.shape}, generator acts on dimension {d}")
    rho = L0.rho_ss if rho_ss is None else rho_ss

    same = [False] * N
    if reuse is not None and reuse.order == N and reuse.Gamma == Gamma:
        same = [a == b for a, b in zip(reuse.frequencies, freqs)]

    zero = (0,) * N
    entries = {(zero, zero): vectorize(rho)}
    for m, mp in all_indices(N)[1:]:
        partner = (mp, m)
        if partner in entries:
            entries[(m, mp)] = vec_dagger(entries[partner])
            continue
        if reuse is not None and all(same[k] or (m[k] == 0 and mp[k] == 0) for k in range(N)):
            entries[(m, mp)] = reuse.entries[(m, mp)]
            continue
        acc = np.zeros((d, d), dtype=complex)
        for k in range(N):
            if m[k]:
                acc += X @ devectorize(entries[(_lowered(m, k), mp)])
            if mp[k]:
                acc -= devectorize(entries[(m, _lowered(mp, k))]) @ Xd
        z = ladder_shift(m, mp, freqs, Gamma)
        entries[(m, mp)] = shifted_solve(L0, z, 1j * acc.reshape(-1))
    return ConditionalStateLadder(freqs, float(Gamma), entries)


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL * max(abs(value.real), DENOMINATOR_FLOOR):
        log.warning("%s has a relative imaginary residue %.2e", what, abs(value.imag / value.real))
    return float(value.real)


def spectrum_value(L0: Liouvillian, x_prime: np.ndarray, omega: float, Gamma: float,
                   rho_ss: np.ndarray | None = None) -> float:
    """S(omega) = Gamma / (2 pi) * Tr rho[1, 1] for one sensor."""
    lad = acs_ladder(L0, x_prime, [omega], Gamma, rho_ss=rho_ss)
    return Gamma / (2 * np.pi) * _real(lad.trace((1,), (1,)), "sensor population")


def correlation_from_ladder(lad: ConditionalStateLadder) -> float:
    denom = 1.0
    for k in range(lad.order):
        p = lad.population(k)
        if p <= DENOMINATOR_FLOOR:
            raise NoEmissionError(
                f"no emission at sensor frequency {lad.frequencies[k]:.6g} "
                f"(population {p:.3e})"
            )
        denom *= p
    return _real(lad.joint(), "joint sensor population") / denom


def gN(L0: Liouvillian, x_prime: np.ndarray, freqs: Sequence[float], Gamma: float,
       reuse: ConditionalStateLadder | None = None) -> float:
    """Zero-delay N-photon correlation of sensors at ``freqs``."""
    return correlation_from_ladder(acs_ladder(L0, x_prime, freqs, Gamma, reuse=reuse))


def g2(L0, x_prime, omega1: float, omega2: float, Gamma: float) -> float:
    return gN(L0, x_prime, [omega1, omega2], Gamma)


def g3(L0, x_prime, omega1: float, omega2: float, omega3: float, Gamma: float) -> float:
    return gN(L0, x_prime, [omega1, omega2, omega3], Gamma)


@dataclass
class Scan:
    """Values of S or g^(N) on a sensor grid.

    ``values[i]`` is ``None`` where a correlation was undefined because a
    sensor saw no emission.
    """

    kind: str
    grid: SensorGrid
    values: list
    fixed_frequencies: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.grid.frequencies)

    def as_array(self) -> np.ndarray:
        """Values as floats, with undefined points masked."""
        return np.ma.masked_invalid(
            np.array([np.nan if v is None else v for v in self.values], dtype=float)
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega_1", "value"])
            for x, v in zip(self.grid.frequencies, self.values):
                w.writerow([f"{x:.9g}", "no_emission" if v is None else f"{v:.9g}"])

    def to_dict(self, peaks: Iterable | None = None) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "Gamma": self.grid.Gamma,
            "fixed_frequencies": dict(self.fixed_frequencies),
            "metadata": _jsonable(self.metadata),
            "omega_1": list(self.grid.frequencies),
            "values": list(self.values),
        }
        if peaks is not None:
            out["peaks"] = [p.to_dict() if hasattr(p, "to_dict") else p for p in peaks]
        return out

    def write_json(self, path, peaks: Iterable | None = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(peaks), fh, indent=2, sort_keys=True)


SpectrumScan = Scan
CorrelationScan = Scan


def _jsonable(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def power_spectrum(L0: Liouvillian, x_prime: np.ndarray, grid: SensorGrid,
                   workers: int = 1, metadata: dict | None = None) -> Scan:
    rho = L0.rho_ss

    def point(w):
        return spectrum_value(L0, x_prime, w, grid.Gamma, rho_ss=rho)

    values = _map(point, grid.frequencies, workers)
    return Scan("spectrum", grid, values, metadata=metadata or {})


def correlation_scan(L0: Liouvillian, x_prime: np.ndarray, grid: SensorGrid,
                     fixed: Sequence[float], workers: int = 1,
                     metadata: dict | None = None) -> Scan:
    """g^(N)(omega_1, *fixed) along the grid, sharing blocks of the fixed sensors."""
    fixed = [float(w) for w in fixed]
    base = acs_ladder(L0, x_prime, [grid.frequencies[0], *fixed], grid.Gamma)

    def point(w):
        try:
            return gN(L0, x_prime, [w, *fixed], grid.Gamma, reuse=base)
        except NoEmissionError as exc:
            log.info("%s", exc)
            return None

    values = _map(point, grid.frequencies, workers)
    names = [f"omega_{k + 2}" for k in range(len(fixed))]
    return Scan(f"g{len(fixed) + 1}", grid, values, dict(zip(names, fixed)), metadata or {})


def g2_scan(L0, x_prime, grid: SensorGrid, omega2: float, **kw) -> Scan:
    return correlation_scan(L0, x_prime, grid, [omega2], **kw)


def g3_scan(L0, x_prime, grid: SensorGrid, omega2: float, omega3: float, **kw) -> Scan:
    return correlation_scan(L0, x_prime, grid, [omega2, omega3], **kw)
