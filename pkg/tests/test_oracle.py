import math

import numpy as np
import pytest

from cerkit.clifford import clifford_from_cycle
from cerkit.pauli import Pauli
from cerkit import oracle as orc
from cerkit import selfcheck


def test_pauli_basis_order_and_size():
    basis = orc.pauli_basis(2)
    assert len(basis) == 16
    assert basis[0] == Pauli.identity(2)


def test_pauli_matrices_are_their_own_inverse():
    for p in orc.pauli_basis(2):
        m = orc.pauli_matrix(p)
        assert np.allclose(m @ m, np.eye(4), atol=1e-12)


def test_clifford_unitary_is_unitary():
    c = clifford_from_cycle([("H", (0,)), ("S", (1,))], 2) @ clifford_from_cycle(
        [("CZ", (0, 1))], 2
    )
    u = orc.clifford_unitary(c)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


def test_ptm_of_unitary_composition():
    a = clifford_from_cycle([("H", (0,))], 1)
    b = clifford_from_cycle([("S", (0,))], 1)
    ua, ub = orc.clifford_unitary(a), orc.clifford_unitary(b)
    lhs = orc.ptm_of_unitary(ub @ ua)
    rhs = orc.ptm_of_unitary(ub) @ orc.ptm_of_unitary(ua)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_random_cptp_ptm_is_trace_preserving():
    rng = np.random.default_rng(0)
    for n in (1, 2):
        m = orc.random_cptp_ptm(n, rng, strength=0.3)
        # Row 0 of a PTM is (1, 0, ..., 0) iff the map preserves trace.
        assert math.isclose(m[0, 0], 1.0, abs_tol=1e-10)
        assert np.allclose(m[0, 1:], 0.0, atol=1e-10)


def test_pauli_twirl_diagonalizes():
    rng = np.random.default_rng(1)
    m = orc.random_cptp_ptm(1, rng, strength=0.4)
    t = orc.pauli_twirl(m)
    assert np.allclose(t, np.diag(np.diag(t)), atol=1e-12)
    assert np.allclose(np.diag(t), np.diag(m), atol=1e-12)


def test_ptm_of_clifford_matches_unitary_route():
    for gates, n in ([("SH", (0,))], 1), ([("CX", (0, 1))], 2):
        c = clifford_from_cycle(gates, n)
        assert np.allclose(
            orc.ptm_of_clifford(c),
            orc.ptm_of_unitary(orc.clifford_unitary(c)),
            atol=1e-12,
        )


def test_process_fidelity_of_identity():
    assert math.isclose(orc.process_fidelity(np.eye(16)), 1.0, abs_tol=1e-12)


def test_size_caps_enforced():
    with pytest.raises(ValueError):
        orc.pauli_basis(4)


def test_selfcheck_fast_suite_passes():
    results = selfcheck.run_all(fast=True)
    assert len(results) == 3
    for name, ok, detail in results:
        assert ok, f"{name}: {detail}"
