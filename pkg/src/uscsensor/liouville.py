"""Dressed-basis master equation in Liouville space.

Density matrices are vectorized by row stacking (``rho.ravel()``), so that

    vec(A rho B) = kron(A, B.T) @ vec(rho)

and left multiplication by ``X`` is ``kron(X, I)`` while right multiplication
by ``X^dag`` is ``kron(I, conj(X))``.

The generator lives on the span of the lowest ``n_levels`` dressed states,
where the Hamiltonian is diagonal. Outside that span no dissipator acts, so
keeping those states would only add spurious stationary states.
"""

from __future__ import annotations

import threading
import warnings
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import zgecon

from .fock import field_operator, qubit_op
from .rabi import DressedBasis

WEIGHTS = ("omega_over_c", "omega_over_q", "unweighted")


class SteadyStateError(RuntimeError):
    """The generator has no unique stationary state."""


class SingularShiftError(RuntimeError):
    """The shifted generator L - z is numerically singular."""


@dataclass(frozen=True)
class RateSet:
    """Cavity decay, qubit decay, sensor linewidth and incoherent pump rate."""

    kappa: float
    gamma: float
    Gamma: float
    P_inc: float

    def __post_init__(self):
        for name in ("kappa", "gamma", "Gamma", "P_inc"):
            if getattr(self, name) < 0:
                raise ValueError(f"rate {name} must be non-negative")

    @classmethod
    def reference(cls, kappa: float = 5e-3) -> "RateSet":
        return cls(kappa=kappa, gamma=kappa, Gamma=kappa, P_inc=0.1 * kappa)

    def smallest_decay(self) -> float:
        rates = [r for r in (self.kappa, self.gamma, self.Gamma, self.P_inc) if r > 0]
        return min(rates)


def vectorize(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    return rho.reshape(-1).astype(complex)


def devectorize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    if v.ndim != 1 or d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(d, d)


def vec_dagger(v: np.ndarray) -> np.ndarray:
    """vec(rho^dag) from vec(rho)."""
    return devectorize(v).conj().T.reshape(-1)


def vec_trace(v: np.ndarray) -> complex:
    return complex(np.trace(devectorize(v)))


def left_super(X: np.ndarray) -> np.ndarray:
    return np.kron(X, np.eye(X.shape[0]))


def right_super_dagger(X: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho X^dag."""
    return np.kron(np.eye(X.shape[0]), X.conj())


def commutator_super(H: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> [H, rho]."""
    eye = np.eye(H.shape[0])
    return np.kron(H, eye) - np.kron(eye, H.T)


def lindblad_dissipator(O: np.ndarray) -> np.ndarray:
    """Superoperator of O rho O^dag - (O^dag O rho + rho O^dag O) / 2."""
    O = np.asarray(O, dtype=complex)
    eye = np.eye(O.shape[0])
    OdO = O.conj().T @ O
    return np.kron(O, O.conj()) - 0.5 * np.kron(OdO, eye) - 0.5 * np.kron(eye, OdO.T)


def trace_dual(d: int) -> np.ndarray:
    return np.eye(d).reshape(-1).astype(complex)


def liouvillian(H, collapse_ops=(), commutator_sign=-1) -> np.ndarray:
    """``commutator_sign * i [H, .] + sum_c L[c]`` as a dense matrix."""
    L = commutator_sign * 1j * commutator_super(np.asarray(H, dtype=complex))
    for c in collapse_ops:
        if c is not None and np.any(c):
            L = L + lindblad_dissipator(c)
    return L


def positive_component(
    basis: DressedBasis, bare_op: np.ndarray, weight: str, n_levels: int
) -> np.ndarray:
    """Lowering part sum_{k>j} <j|op|k> |j><k| w_kj in the dressed basis.

    ``weight`` selects w_kj = omega_kj/omega_c, omega_kj/omega_q or 1.
    """
    if weight not in WEIGHTS:
        raise ValueError(f"unknown weight {weight!r}; expected one of {WEIGHTS}")
    basis.require(n_levels)
    M = basis.to_dressed(bare_op, n_levels)
    E = basis.energies[:n_levels]
    omega = E[None, :] - E[:, None]  # omega[j, k] = E_k - E_j
    out = np.triu(M, 1)
    if weight == "omega_over_c":
        out = out * omega / basis.params.omega_c
    elif weight == "omega_over_q":
        out = out * omega / basis.params.omega_q
    return np.triu(out, 1)


def build_X_plus(basis: DressedBasis, eta: float, n_levels: int) -> np.ndarray:
    return positive_component(basis, field_operator(basis.space, eta), "omega_over_c", n_levels)


def build_D_plus(basis: DressedBasis, n_levels: int) -> np.ndarray:
    return positive_component(basis, 1j * qubit_op(basis.space, "sx"), "omega_over_q", n_levels)


def build_X_prime(basis: DressedBasis, eta: float, n_levels: int) -> np.ndarray:
    """Unweighted positive-frequency field operator that drives the sensors."""
    return positive_component(basis, field_operator(basis.space, eta), "unweighted", n_levels)


def _lu(A):
    # singularity is judged from the condition estimate, not scipy's warning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        return sla.lu_factor(A, check_finite=False)


class Liouvillian:
    """Dense generator acting on row-stacked density matrices of dimension ``dim``.

    Factorizations of ``generator - z`` are cached per shift; the cache is
    bounded and guarded by a lock so concurrent solves may share it. Each
    entry carries its own lock: OpenBLAS corrupts the heap when two threads
    back-substitute with the same LU arrays at once.
    """

    def __init__(self, generator: np.ndarray, dim: int, basis: DressedBasis | None = None,
                 cache_size: int = 32):
        generator = np.asarray(generator, dtype=complex)
        if generator.shape != (dim * dim, dim * dim):
            raise ValueError(f"generator shape {generator.shape} does not match dim {dim}")
        self.generator = generator
        self.dim = dim
        self.basis = basis
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size
        self._lock = threading.Lock()

    @property
    def trace_dual(self) -> np.ndarray:
        return trace_dual(self.dim)

    def trace_violation(self) -> float:
        return float(np.max(np.abs(self.trace_dual @ self.generator)))

    def null_space_gap(self) -> float:
        """Ratio of the two smallest singular values (large means unique steady state)."""
        s = sla.svdvals(self.generator)
        return float(s[-2] / max(s[-1], np.finfo(float).tiny))

    @cached_property
    def rho_ss(self) -> np.ndarray:
        return steady_state(self)

    def factor(self, z: complex):
        key = complex(z)
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        A = self.generator - key * np.eye(self.generator.shape[0])
        lu, piv = _lu(A)
        anorm = np.max(np.sum(np.abs(A), axis=0))
        rcond, info = zgecon(lu, anorm, norm="1")
        entry = (lu, piv, float(rcond), threading.Lock())
        with self._lock:
            self._cache[key] = entry
            while len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        return entry


def build_L0(
    basis: DressedBasis,
    rates: RateSet,
    n_levels: int,
    commutator_sign: int = -1,
) -> Liouvillian:
    """System generator: -i[H,.] + kappa L[X+] + gamma L[D+] + P_inc L[X-].

    ``commutator_sign=+1`` flips the coherent part; it exists only to build
    deliberately wrong generators for negative-control checks.
    """
    basis.require(n_levels)
    Xp = build_X_plus(basis, basis.params.eta, n_levels)
    Dp = build_D_plus(basis, n_levels)
    H = np.diag(basis.energies[:n_levels]).astype(complex)
    L = liouvillian(
        H,
        [
            np.sqrt(rates.kappa) * Xp,
            np.sqrt(rates.gamma) * Dp,
            np.sqrt(rates.P_inc) * Xp.conj().T,
        ],
        commutator_sign=commutator_sign,
    )
    return Liouvillian(L, n_levels, basis)


def steady_state(L0: Liouvillian, rcond_floor: float = 1e-14) -> np.ndarray:
    """Unit-trace null vector of the generator.

    One diagonal-element row of the generator is replaced by the trace
    condition; a numerically singular bordered system means the null space
    is not one-dimensional and is reported as :class:`SteadyStateError`.
    """
    d = L0.dim
    A = L0.generator.copy()
    A[0, :] = L0.trace_dual
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    lu, piv = _lu(A)
    anorm = np.max(np.sum(np.abs(A), axis=0))
    rcond, _ = zgecon(lu, anorm, norm="1")
    if rcond < rcond_floor:
        raise SteadyStateError(
            f"steady state is not unique (reciprocal condition {rcond:.2e})"
        )
    return devectorize(sla.lu_solve((lu, piv), b))


def shifted_solve(L0: Liouvillian, z: complex, rhs: np.ndarray, rcond_floor: float = 1e-14) -> np.ndarray:
    """Solve (L0 - z) x = rhs; needs Re(z) > 0 for a dissipative generator."""
    rhs = np.asarray(rhs, dtype=complex)
    if not np.any(rhs):
        return np.zeros_like(rhs)
    lu, piv, rcond, lock = L0.factor(z)
    if rcond < rcond_floor:
        raise SingularShiftError(
            f"L0 - z is near-singular at z={complex(z):.6g} (reciprocal condition {rcond:.2e})"
        )
    with lock:
        return sla.lu_solve((lu, piv), rhs, check_finite=False)
