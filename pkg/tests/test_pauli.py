import pytest
from hypothesis import given, strategies as st

from cerkit.pauli import Pauli, QubitSet, chi, enumerate_subgroup, multiply


def random_pauli(n):
    return st.tuples(
        st.integers(0, 2 ** n - 1), st.integers(0, 2 ** n - 1)
    ).map(lambda xz: Pauli.hermitian(n, xz[0], xz[1]))


def test_from_string_round_trip():
    p = Pauli.from_string("ZXX@{0,2,5}", 6)
    assert p.label() == "ZXX@{0,2,5}"
    assert p.letter(0) == "Z" and p.letter(2) == "X" and p.letter(5) == "X"
    assert p.weight == 3
    assert p.support == QubitSet({0, 2, 5})


def test_from_string_infers_width():
    p = Pauli.from_string("Y@{3}")
    assert p.n == 4
    assert p.letter(3) == "Y"


def test_from_string_rejects_mismatched_lengths():
    with pytest.raises(ValueError):
        Pauli.from_string("XX@{0}", 2)


def test_identity_basics():
    i = Pauli.identity(3)
    assert i.weight == 0
    assert i.support == QubitSet()
    p = Pauli.single("Y", 1, 3)
    assert (p * p).phaseless() == i


def test_single_letters():
    for letter in "XYZ":
        p = Pauli.single(letter, 2, 4)
        assert p.letter(2) == letter
        assert p.weight == 1


def test_chi_known_values():
    x = Pauli.single("X", 0, 1)
    z = Pauli.single("Z", 0, 1)
    y = Pauli.single("Y", 0, 1)
    assert chi(x, z) == -1
    assert chi(x, y) == -1
    assert chi(z, y) == -1
    assert chi(x, x) == 1
    assert chi(x, Pauli.identity(1)) == 1


@given(random_pauli(3), random_pauli(3))
def test_chi_symmetric(p, q):
    assert chi(p, q) == chi(q, p)
    assert chi(p, q) in (-1, 1)


@given(random_pauli(3), random_pauli(3), random_pauli(3))
def test_chi_multiplicative(p, q, r):
    assert chi(multiply(p, q), r) == chi(p, r) * chi(q, r)


@given(random_pauli(3), random_pauli(3))
def test_commutes_matches_chi(p, q):
    assert p.commutes(q) == (chi(p, q) == 1)


@given(random_pauli(2), random_pauli(2))
def test_product_supports_stay_inside_union(p, q):
    prod = p * q
    assert set(prod.support) <= set(p.support) | set(q.support)


def test_restrict():
    p = Pauli.from_string("XZ@{0,2}", 4)
    a = QubitSet({0, 1})
    r = p.restrict(a)
    assert r.n == 4
    assert r.letter(0) == "X" and r.weight == 1


def test_enumerate_subgroup_size():
    a = QubitSet({1, 3})
    group = enumerate_subgroup(a, 4)
    assert len(group) == 16
    assert len({(p.x, p.z) for p in group}) == 16
    for p in group:
        assert set(p.support) <= set(a)


def test_qubitset_repr_and_mask():
    a = QubitSet({3, 1})
    assert repr(a) == "{1,3}"
    assert a.mask() == 0b1010
    assert a.complement(4) == QubitSet({0, 2})
