"""Frequency-filtered photon statistics of the ultrastrongly coupled Rabi model."""

from .cascade import (
    ConditionalStateLadder,
    NoEmissionError,
    Scan,
    SensorGrid,
    acs_ladder,
    correlation_scan,
    g2,
    g3,
    gN,
    power_spectrum,
    spectrum_value,
)
from .fock import TruncatedSpace, annihilation, build_space, creation, field_operator, qubit_op, sigma_p
from .liouville import Liouvillian, RateSet, build_L0, shifted_solve, steady_state
from .model import DressedModel, build_model
from .peaks import PeakAssignment, find_peaks, resolve_symbolic_frequency
from .rabi import ConvergenceError, DressedBasis, RabiParams, diagonalize, energy_sweep, hamiltonian, transition_table

__version__ = "0.1.0"
