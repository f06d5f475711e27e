import numpy as np
import pytest

from uscsensor.fock import (
    annihilation, build_space, creation, field_operator, is_hermitian, number, qubit_op, sigma_p,
)


def test_dimensions():
    s = build_space(5)
    assert s.dim_cavity == 6 and s.dim_total == 12
    assert s.index(1, 0) == 6


def test_rejects_bad_cutoff():
    with pytest.raises(ValueError):
        build_space(0)


def test_annihilation_on_one_photon():
    s = build_space(1)
    a = annihilation(s)
    assert np.allclose(a @ s.ket(0, 1), s.ket(0, 0))
    assert np.allclose(a @ s.ket(1, 1), s.ket(1, 0))
    assert np.allclose(a @ s.ket(0, 0), 0)


def test_creation_is_adjoint():
    s = build_space(7)
    assert np.allclose(creation(s), annihilation(s).conj().T, atol=1e-14)


def test_commutator_below_cutoff():
    s = build_space(10)
    a, ad = annihilation(s), creation(s)
    comm = a @ ad - ad @ a
    keep = s.photon_numbers() < s.n_fock
    assert np.allclose(comm[np.ix_(keep, keep)], np.eye(keep.sum()), atol=1e-13)


def test_number_operator():
    s = build_space(4)
    assert np.allclose(np.diag(number(s)), s.photon_numbers())


def test_pauli_algebra():
    s = build_space(2)
    sx, sz = qubit_op(s, "sx"), qubit_op(s, "sz")
    sp, sm = qubit_op(s, "splus"), qubit_op(s, "sminus")
    assert np.allclose(sx, sp + sm)
    assert np.allclose(sp @ s.ket(0, 1), s.ket(1, 1))
    assert np.allclose(sz @ s.ket(1, 0), s.ket(1, 0))
    assert np.allclose(sz @ s.ket(0, 0), -s.ket(0, 0))
    assert np.allclose(sx @ sz + sz @ sx, 0)
    with pytest.raises(ValueError):
        qubit_op(s, "sy")


def test_sigma_p_limits():
    s = build_space(2)
    assert np.allclose(sigma_p(s, np.pi / 2), -qubit_op(s, "sx"))
    assert np.allclose(sigma_p(s, 0.0), qubit_op(s, "sz"))


def test_field_operator_hermitian():
    s = build_space(6)
    assert is_hermitian(field_operator(s, 0.3))
    assert not is_hermitian(annihilation(s))
