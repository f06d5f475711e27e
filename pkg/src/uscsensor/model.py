"""One-call construction of everything the sensor calculations need."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import TruncatedSpace, build_space
from .liouville import Liouvillian, RateSet, build_L0, build_X_prime
from .rabi import DressedBasis, RabiParams, diagonalize

DEFAULT_N_FOCK = 20
DEFAULT_N_LEVELS = 12


@dataclass
class DressedModel:
    params: RabiParams
    rates: RateSet
    space: TruncatedSpace
    basis: DressedBasis
    n_levels: int
    L0: Liouvillian
    x_prime: np.ndarray

    @property
    def rho_ss(self) -> np.ndarray:
        return self.L0.rho_ss

    def frequency(self, k: int, j: int) -> float:
        return self.basis.frequency(k, j)


def build_model(
    params: RabiParams,
    rates: RateSet,
    n_fock: int = DEFAULT_N_FOCK,
    n_levels: int = DEFAULT_N_LEVELS,
    commutator_sign: int = -1,
) -> DressedModel:
    space = build_space(n_fock)
    basis = diagonalize(space, params, n_levels)
    return DressedModel(
        params=params,
        rates=rates,
        space=space,
        basis=basis,
        n_levels=n_levels,
        L0=build_L0(basis, rates, n_levels, commutator_sign=commutator_sign),
        x_prime=build_X_prime(basis, params.eta, n_levels),
    )
