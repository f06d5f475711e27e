import csv

import numpy as np
import pytest

from conftest import LEVELS_PI_2, LEVELS_PI_6
from uscsensor.fock import build_space, field_operator
from uscsensor.peaks import TRANSITION_LABELS
from uscsensor.rabi import (
    ConvergenceError, RabiParams, diagonalize, energy_sweep, hamiltonian, parity_operator,
    symmetric_point, transition_table,
)


def test_decoupled_spectrum():
    s = build_space(6)
    b = diagonalize(s, RabiParams(g=0.0, theta=0.4), n_levels=6)
    assert np.allclose(b.energies[:6], [0, 1, 1, 2, 2, 3], atol=1e-12)
    assert b.parity[:3] == ("even", "odd", "odd")


def test_detuned_decoupled_spectrum():
    b = diagonalize(build_space(6), RabiParams(g=0.0, theta=np.pi / 2, omega_q=0.7), n_levels=4)
    assert np.allclose(b.energies[:4], [0, 0.7, 1, 1.7], atol=1e-12)


def test_hamiltonian_hermitian():
    H = hamiltonian(build_space(10), RabiParams(g=0.3, theta=0.9))
    assert np.allclose(H, H.conj().T, atol=0)


@pytest.mark.parametrize("theta,commutes", [(np.pi / 2, True), (3 * np.pi / 2, True), (np.pi / 6, False)])
def test_parity_symmetry(theta, commutes):
    s = build_space(15)
    H = hamiltonian(s, RabiParams(g=0.3, theta=theta))
    P = parity_operator(s)
    norm = np.linalg.norm(H @ P - P @ H)
    assert (norm < 1e-12) == commutes
    assert symmetric_point(theta) == commutes


@pytest.mark.parametrize("theta,levels", [(np.pi / 2, LEVELS_PI_2), (np.pi / 6, LEVELS_PI_6)])
def test_levels_match_high_cutoff_oracle(theta, levels):
    b = diagonalize(build_space(20), RabiParams(g=0.3, theta=theta), n_levels=12)
    assert np.allclose(b.energies[:8], levels, rtol=0, atol=1e-9)


def test_oracle_module_reproduces_fixtures():
    from oracles import rabi_levels
    assert np.allclose(rabi_levels(0.3, np.pi / 2, 60), LEVELS_PI_2, atol=1e-11)


def test_cutoff_bump_stability():
    p = RabiParams(g=0.3, theta=np.pi / 2)
    a = diagonalize(build_space(20), p).energies[:8]
    b = diagonalize(build_space(24), p).energies[:8]
    assert np.max(np.abs(a - b)) < 1e-8


def test_convergence_error_when_cutoff_too_small():
    with pytest.raises(ConvergenceError):
        diagonalize(build_space(3), RabiParams(g=0.3, theta=np.pi / 2), n_levels=8)


def test_eigenvectors_orthonormal_and_deterministic():
    s = build_space(12)
    p = RabiParams(g=0.2, theta=np.pi / 2)
    b1, b2 = diagonalize(s, p), diagonalize(s, p)
    V = b1.states
    assert np.allclose(V.conj().T @ V, np.eye(V.shape[1]), atol=1e-12)
    assert np.array_equal(b1.states, b2.states)


def test_parity_labels_at_symmetric_point(model_sym):
    b = model_sym.basis
    assert b.parity[:8] == ("even", "odd", "odd", "even", "even", "odd", "even", "odd")


def test_selection_rules(model_sym, model_broken):
    b = model_sym.basis
    F = b.to_dressed(field_operator(b.space, b.params.eta), 12)
    for j in range(12):
        for k in range(12):
            if b.parity[j] == b.parity[k]:
                assert abs(F[j, k]) < 1e-10
    assert set(model_broken.basis.parity[:8]) == {"none"}


def test_transition_table_pairs(model_sym, model_broken):
    allowed = {pair for pair, lab in TRANSITION_LABELS.items() if lab in "ABCDEFGHIJ"}
    forbidden = {pair for pair, lab in TRANSITION_LABELS.items() if lab in "KLMNO"}
    op = field_operator(model_sym.space, model_sym.params.eta)
    sym = {(t.k, t.j) for t in transition_table(model_sym.basis, op, 8)}
    assert allowed <= sym and not (forbidden & sym)
    brk = {(t.k, t.j) for t in transition_table(model_broken.basis, op, 8)}
    assert forbidden <= brk


def test_transition_table_sorted(model_sym):
    op = field_operator(model_sym.space, model_sym.params.eta)
    t = transition_table(model_sym.basis, op, 8)
    assert [x.omega for x in t] == sorted(x.omega for x in t)
    assert t[0].symbol.startswith("w")


def test_energy_sweep_csv(tmp_path):
    sweep = energy_sweep(build_space(12), 1.0, np.pi / 2, np.linspace(0, 0.3, 4), n_levels=4)
    path = tmp_path / "e.csv"
    sweep.write_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0][:5] == ["g", "E_0", "E_1", "E_2", "E_3"]
    assert len(rows) == 5
    assert rows[1][1:5] == ["0", "1", "1", "2"]
    with pytest.raises(ValueError):
        energy_sweep(build_space(4), 1.0, 0.1, [])
