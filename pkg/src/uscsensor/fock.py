"""Truncated qubit-cavity Hilbert space and its elementary operators.

Basis ordering is qubit (x) cavity: ``index = qubit_index * dim_cavity + n``
with ``qubit_index`` 0 for |g> and 1 for |e>. Operators are dense complex
``numpy`` arrays of shape ``(dim_total, dim_total)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QUBIT_OPS = ("sx", "sz", "splus", "sminus")


@dataclass(frozen=True)
class TruncatedSpace:
    """Composite space with Fock states |0>..|n_fock> and one qubit."""

    n_fock: int

    def __post_init__(self):
        if int(self.n_fock) != self.n_fock or self.n_fock < 1:
            raise ValueError(f"n_fock must be an integer >= 1, got {self.n_fock!r}")

    @property
    def dim_cavity(self) -> int:
        return self.n_fock + 1

    @property
    def dim_total(self) -> int:
        return 2 * self.dim_cavity

    def index(self, qubit: int, n: int) -> int:
        """Position of |qubit, n> in the composite basis."""
        if qubit not in (0, 1) or not 0 <= n <= self.n_fock:
            raise IndexError(f"no basis state |{qubit}, {n}> in {self}")
        return qubit * self.dim_cavity + n

    def ket(self, qubit: int, n: int) -> np.ndarray:
        v = np.zeros(self.dim_total, dtype=complex)
        v[self.index(qubit, n)] = 1.0
        return v

    def photon_numbers(self) -> np.ndarray:
        return np.tile(np.arange(self.dim_cavity), 2)

    def qubit_excitations(self) -> np.ndarray:
        return np.repeat([0, 1], self.dim_cavity)

    def check(self, op: np.ndarray) -> np.ndarray:
        op = np.asarray(op)
        if op.shape != (self.dim_total, self.dim_total):
            raise ValueError(
                f"operator shape {op.shape} does not match space dim {self.dim_total}"
            )
        return op


def build_space(n_fock: int) -> TruncatedSpace:
    return TruncatedSpace(n_fock)


def is_hermitian(op: np.ndarray, rtol: float = 1e-12) -> bool:
    scale = np.max(np.abs(op))
    if scale == 0:
        return True
    return np.max(np.abs(op - op.conj().T)) < rtol * scale


def _on_cavity(space: TruncatedSpace, op: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(2), op).astype(complex)


def _on_qubit(space: TruncatedSpace, op: np.ndarray) -> np.ndarray:
    return np.kron(op, np.eye(space.dim_cavity)).astype(complex)


def annihilation(space: TruncatedSpace) -> np.ndarray:
    """Cavity lowering operator; the top Fock state is simply cut off."""
    a = np.diag(np.sqrt(np.arange(1, space.dim_cavity)), 1)
    return _on_cavity(space, a)


def creation(space: TruncatedSpace) -> np.ndarray:
    a_dag = np.diag(np.sqrt(np.arange(1, space.dim_cavity)), -1)
    return _on_cavity(space, a_dag)


def number(space: TruncatedSpace) -> np.ndarray:
    return np.diag(space.photon_numbers()).astype(complex)


def qubit_op(space: TruncatedSpace, which: str) -> np.ndarray:
    """Qubit operator: ``sx``, ``sz``, ``splus`` (|e><g|) or ``sminus`` (|g><e|)."""
    splus = np.array([[0, 0], [1, 0]], dtype=complex)  # row e, column g
    mats = {
        "splus": splus,
        "sminus": splus.T.copy(),
        "sx": splus + splus.T,
        "sz": np.diag([-1.0, 1.0]).astype(complex),
    }
    if which not in mats:
        raise ValueError(f"unknown qubit operator {which!r}; expected one of {QUBIT_OPS}")
    return _on_qubit(space, mats[which])


def sigma_p(space: TruncatedSpace, theta: float) -> np.ndarray:
    """Mixed longitudinal/transverse qubit operator cos(theta) sz - sin(theta) sx."""
    return np.cos(theta) * qubit_op(space, "sz") - np.sin(theta) * qubit_op(space, "sx")


def field_operator(space: TruncatedSpace, eta: float) -> np.ndarray:
    """Hermitian field operator i(a^dag - a) + 2 eta sx seen by sensors and baths."""
    a = annihilation(space)
    return 1j * (a.conj().T - a) + 2 * eta * qubit_op(space, "sx")
