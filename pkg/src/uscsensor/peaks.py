"""Peak detection on scans and assignment to dressed-state transitions."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .rabi import DressedBasis, Transition

# (k, j) -> label used for the emission lines of the reference spectra
TRANSITION_LABELS = {
    (5, 4): "A", (3, 2): "B", (1, 0): "C", (3, 1): "D", (5, 3): "E",
    (7, 4): "F", (4, 2): "G", (2, 0): "H", (4, 1): "I", (7, 3): "J",
    (2, 1): "K", (4, 3): "L", (5, 2): "M", (3, 0): "N", (5, 1): "O",
}
PARITY_ALLOWED = tuple("ABCDEFGHIJ")
SYMMETRY_BREAKING = tuple("KLMNO")

_SYMBOL = re.compile(r"^w(\d+)(?:_(\d+))?$")


@dataclass(frozen=True)
class PeakAssignment:
    omega_peak: float
    height: float
    transition: tuple | None = None
    label: str | None = None
    kind: str = "maximum"

    @property
    def assigned(self) -> bool:
        return self.transition is not None

    def to_dict(self) -> dict:
        return {
            "omega_peak": self.omega_peak,
            "height": self.height,
            "transition": "unassigned" if self.transition is None else f"{self.transition[0]}->{self.transition[1]}",
            "label": self.label,
            "kind": self.kind,
        }


def resolve_symbolic_frequency(symbol: str, basis: DressedBasis, n_levels: int | None = None) -> float:
    """Frequency of ``"w<k><j>"`` (or ``"w<k>_<j>"``) as E_k - E_j.

    Two-digit level indices need the underscore form, e.g. ``"w10_3"``.
    """
    m = _SYMBOL.match(symbol.strip())
    if not m:
        raise ValueError(f"cannot parse frequency symbol {symbol!r}")
    if m.group(2) is not None:
        k, j = int(m.group(1)), int(m.group(2))
    else:
        digits = m.group(1)
        if len(digits) != 2:
            raise ValueError(f"ambiguous frequency symbol {symbol!r}; use w<k>_<j>")
        k, j = int(digits[0]), int(digits[1])
    if k <= j:
        raise ValueError(f"frequency symbol {symbol!r} needs k > j")
    limit = basis.n_levels_converged if n_levels is None else min(n_levels, basis.n_levels_converged)
    if k >= limit:
        raise ValueError(f"level {k} in {symbol!r} is beyond the {limit} trusted levels")
    return basis.frequency(k, j)


def _refine(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex of the parabola through the three points around index ``i``."""
    if i == 0 or i == len(y) - 1:
        return float(x[i]), float(y[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom >= 0:
        return float(x[i]), float(y1)
    h = x[i + 1] - x[i]
    t = 0.5 * (y0 - y2) / denom
    return float(x[i] + t * h), float(y1 - 0.25 * (y0 - y2) * t)


def _assign(omega: float, transitions: Sequence[Transition], Gamma: float):
    best = None
    for t in transitions:
        dist = abs(t.omega - omega)
        if dist <= Gamma and (best is None or dist < abs(best.omega - omega)):
            best = t
    if best is None:
        return None, None
    key = (best.k, best.j)
    return key, TRANSITION_LABELS.get(key)


def find_peaks(
    omega: Sequence[float],
    values: Sequence[float],
    Gamma: float,
    transitions: Sequence[Transition] = (),
    prominence_floor: float = 0.005,
    shoulders: bool = False,
) -> list[PeakAssignment]:
    """Local maxima above ``prominence_floor * max(values)``.

    Peak positions are refined by a three-point parabola and matched to the
    nearest transition within ``Gamma``. With ``shoulders=True``, inflection
    bumps (local maxima of the negative curvature) that are farther than
    ``Gamma`` from every maximum are reported too, with ``kind="shoulder"``.
    """
    x = np.asarray(omega, dtype=float)
    y = np.asarray([np.nan if v is None else v for v in values], dtype=float)
    finite = np.isfinite(y)
    if not finite.any():
        return []
    # undefined points (no emission) can never be peaks
    y = np.where(finite, y, np.min(y[finite]))
    if x.size > 1 and np.max(np.diff(x)) > Gamma / 5 * (1 + 1e-9):
        raise ValueError("peak search needs a grid step no coarser than Gamma/5")
    floor = prominence_floor * np.max(y)
    idx, _ = _scipy_find_peaks(y)
    out = []
    for i in idx:
        # a maximum next to an undefined point is an artefact of the fill
        if y[i] < floor or not (finite[i - 1] and finite[i + 1]):
            continue
        w, h = _refine(x, y, i)
        key, label = _assign(w, transitions, Gamma)
        out.append(PeakAssignment(w, h, key, label, "maximum"))
    if shoulders and x.size > 4:
        curv = -np.gradient(np.gradient(y, x), x)
        sidx, _ = _scipy_find_peaks(curv)
        maxima = [p.omega_peak for p in out]
        for i in sidx:
            if i < 3 or i > len(y) - 4 or y[i] < floor or curv[i] <= 0 or not finite[i - 3: i + 4].all():
                continue
            if any(abs(x[i] - m) <= Gamma for m in maxima):
                continue
            # a genuine shoulder flattens the slope: curvature changes sign around it
            if not np.any(-curv[max(i - 5, 0): i + 6] > 0):
                continue
            key, label = _assign(float(x[i]), transitions, Gamma)
            out.append(PeakAssignment(float(x[i]), float(y[i]), key, label, "shoulder"))
    out.sort(key=lambda p: p.omega_peak)
    return out


def label_map(peaks: Sequence[PeakAssignment]) -> dict:
    return {p.label: p for p in peaks if p.label is not None}
