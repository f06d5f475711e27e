"""Extended quantum Rabi Hamiltonian, its dressed basis and transition data."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .fock import (
    TruncatedSpace,
    annihilation,
    build_space,
    number,
    qubit_op,
    sigma_p,
)

CONVERGENCE_TOL = 1e-8
CUTOFF_BUMP = 4
PARITY_TOL = 1e-6
DEGENERACY_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Requested more dressed levels than the Fock cutoff supports."""


@dataclass(frozen=True)
class RabiParams:
    """Model parameters, frequencies in units where omega_c sets the scale."""

    g: float
    theta: float
    omega_q: float = 1.0
    omega_c: float = 1.0

    def __post_init__(self):
        if self.omega_c <= 0 or self.omega_q <= 0:
            raise ValueError("omega_c and omega_q must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")

    @property
    def eta(self) -> float:
        return self.g / self.omega_c


def hamiltonian(space: TruncatedSpace, params: RabiParams) -> np.ndarray:
    a = annihilation(space)
    splus = qubit_op(space, "splus")
    H = (
        params.omega_c * number(space)
        + params.omega_q * splus @ splus.conj().T
        - 1j * params.g * (a - a.conj().T) @ sigma_p(space, params.theta)
    )
    # kill rounding asymmetry from the product
    return 0.5 * (H + H.conj().T)


def parity_operator(space: TruncatedSpace) -> np.ndarray:
    """Excitation-number parity, diagonal with entries (-1)**(n + qubit)."""
    exc = space.photon_numbers() + space.qubit_excitations()
    return np.diag((-1.0) ** exc).astype(complex)


@dataclass(frozen=True)
class DressedBasis:
    """Ordered eigenpairs of the Rabi Hamiltonian on a truncated space.

    ``states[:, j]`` is the eigenvector of ``energies[j]``; ``parity[j]`` is
    ``"even"``, ``"odd"`` or ``"none"``. Only the first ``n_levels_converged``
    levels survive the cutoff-bump test and should be trusted.
    """

    space: TruncatedSpace
    params: RabiParams
    energies: np.ndarray
    states: np.ndarray
    parity: tuple
    n_levels_converged: int

    def frequency(self, k: int, j: int) -> float:
        """Transition frequency omega_kj = E_k - E_j."""
        return float(self.energies[k] - self.energies[j])

    def to_dressed(self, op: np.ndarray, n_levels: int | None = None) -> np.ndarray:
        """Matrix elements <j|op|k> restricted to the first ``n_levels`` states."""
        V = self.states if n_levels is None else self.states[:, :n_levels]
        return V.conj().T @ self.space.check(op) @ V

    def require(self, n_levels: int) -> None:
        if n_levels > self.n_levels_converged:
            raise ConvergenceError(
                f"{n_levels} levels requested but only {self.n_levels_converged} "
                f"converged at n_fock={self.space.n_fock}"
            )


def _order_eigenpairs(E, V, space):
    """Deterministic ordering: energy, then even before odd, then bare overlap."""
    P = np.real(np.diag(parity_operator(space)))
    E = E.copy()
    V = V.copy()
    i = 0
    n = len(E)
    while i < n:
        j = i + 1
        while j < n and E[j] - E[i] < DEGENERACY_TOL:
            j += 1
        if j - i > 1:
            block = V[:, i:j]
            # rotate a degenerate cluster onto parity eigenvectors where possible
            pb = block.conj().T @ (P[:, None] * block)
            w, u = np.linalg.eigh(0.5 * (pb + pb.conj().T))
            block = block @ u
            keys = []
            for c in range(block.shape[1]):
                bare = int(np.argmax(np.abs(block[:, c])))
                keys.append((-round(w[c]), bare))
            order = sorted(range(block.shape[1]), key=lambda c: keys[c])
            V[:, i:j] = block[:, order]
            E[i:j] = np.mean(E[i:j])
        i = j
    # fix the global phase of each column: largest component real positive
    for c in range(V.shape[1]):
        k = np.argmax(np.abs(V[:, c]))
        V[:, c] *= np.exp(-1j * np.angle(V[k, c]))
    return E, V


def _parity_labels(V, space):
    diag = np.real(np.einsum("ij,i,ij->j", V.conj(), np.diag(parity_operator(space)).real, V))
    labels = []
    for p in diag:
        if p > 1 - PARITY_TOL:
            labels.append("even")
        elif p < -(1 - PARITY_TOL):
            labels.append("odd")
        else:
            labels.append("none")
    return tuple(labels)


def diagonalize(
    space: TruncatedSpace, params: RabiParams, n_levels: int = 8
) -> DressedBasis:
    """Diagonalize the Rabi Hamiltonian and certify the lowest ``n_levels``.

    The convergence count compares against a diagonalization with the Fock
    cutoff raised by four; levels whose energy moves by more than
    ``1e-8 * omega_c`` are not trusted.
    """
    E, V = np.linalg.eigh(hamiltonian(space, params))
    E, V = _order_eigenpairs(E, V, space)
    bumped = build_space(space.n_fock + CUTOFF_BUMP)
    E_hi = np.linalg.eigvalsh(hamiltonian(bumped, params))
    tol = CONVERGENCE_TOL * params.omega_c
    n_conv = 0
    while n_conv < len(E) and abs(E[n_conv] - E_hi[n_conv]) < tol:
        n_conv += 1
    basis = DressedBasis(
        space=space,
        params=params,
        energies=E,
        states=V,
        parity=_parity_labels(V, space),
        n_levels_converged=n_conv,
    )
    basis.require(n_levels)
    return basis


@dataclass(frozen=True)
class Transition:
    k: int
    j: int
    omega: float
    amplitude: complex

    @property
    def symbol(self) -> str:
        return f"w{self.k}{self.j}" if max(self.k, self.j) < 10 else f"w{self.k}_{self.j}"


def transition_table(
    basis: DressedBasis,
    transition_op: np.ndarray,
    n_levels: int,
    floor: float = 1e-8,
) -> list[Transition]:
    """Downward transitions k -> j (k > j) with |<j|op|k>| above ``floor``."""
    basis.require(n_levels)
    M = basis.to_dressed(transition_op, n_levels)
    out = []
    for k in range(n_levels):
        for j in range(k):
            if abs(M[j, k]) > floor:
                out.append(Transition(k, j, basis.frequency(k, j), complex(M[j, k])))
    out.sort(key=lambda t: (t.omega, t.k, t.j))
    return out


@dataclass
class EnergySweep:
    g: np.ndarray
    energies: np.ndarray  # shape (len(g), n_levels)
    parity: list = field(default_factory=list)

    def write_csv(self, path) -> None:
        n = self.energies.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["g"] + [f"E_{i}" for i in range(n)] + [f"parity_{i}" for i in range(n)])
            for gi, Ei, Pi in zip(self.g, self.energies, self.parity):
                w.writerow([f"{gi:.9g}"] + [f"{e:.9g}" for e in Ei] + list(Pi))


def energy_sweep(
    space: TruncatedSpace,
    omega_q: float,
    theta: float,
    g_grid: Iterable[float],
    n_levels: int = 8,
    omega_c: float = 1.0,
) -> EnergySweep:
    g_grid = np.asarray(list(g_grid), dtype=float)
    if g_grid.size == 0:
        raise ValueError("g grid is empty")
    rows, labels = [], []
    for g in g_grid:
        basis = diagonalize(space, RabiParams(g=g, theta=theta, omega_q=omega_q, omega_c=omega_c), n_levels)
        rows.append(basis.energies[:n_levels])
        labels.append(basis.parity[:n_levels])
    return EnergySweep(g=g_grid, energies=np.array(rows), parity=labels)


def symmetric_point(theta: float, atol: float = 1e-12) -> bool:
    """True when theta is an odd multiple of pi/2, where parity is conserved."""
    r = (theta - np.pi / 2) / np.pi
    return abs(r - round(r)) < atol


__all__ = [
    "ConvergenceError",
    "DressedBasis",
    "EnergySweep",
    "RabiParams",
    "Transition",
    "diagonalize",
    "energy_sweep",
    "hamiltonian",
    "parity_operator",
    "symmetric_point",
    "transition_table",
]
