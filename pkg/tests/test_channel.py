import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cerkit.channel import (
    CoherentTerm,
    PauliDistribution,
    compose,
    dist_from_fidelities,
    fidelities_on_support,
    fidelity_from_dist,
    marginal,
    marginal_from_fidelities,
    orbit_average,
    orbit_marginal_from_orbit_fidelities,
    pauli_twirl_rotation,
    weight2_inversion,
)
from cerkit.clifford import clifford_from_cycle, orbit_partition
from cerkit.pauli import Pauli, QubitSet, enumerate_subgroup
from cerkit import oracle as orc


def _dist(n, rng):
    paulis = enumerate_subgroup(QubitSet(range(n)), n)
    raw = rng.random(len(paulis))
    raw[0] += 5.0
    raw /= raw.sum()
    return PauliDistribution(n, dict(zip(paulis, map(float, raw))))


def test_distribution_validation():
    with pytest.raises(ValueError):
        PauliDistribution(1, {Pauli.identity(1): 0.5})
    with pytest.raises(ValueError):
        PauliDistribution(1, {Pauli.identity(1): 1.2, Pauli.single("X", 0, 1): -0.2})


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_fidelity_dist_round_trip(seed):
    rng = np.random.default_rng(seed)
    dist = _dist(2, rng)
    table = fidelities_on_support(dist, QubitSet({0, 1}))
    back = dist_from_fidelities(table)
    for p in enumerate_subgroup(QubitSet({0, 1}), 2):
        assert math.isclose(back.prob(p), dist.prob(p), abs_tol=1e-12)


def test_fidelity_matches_dense_channel():
    rng = np.random.default_rng(3)
    dist = _dist(2, rng)
    ptm = np.zeros((16, 16))
    basis = orc.pauli_basis(2)
    for p, prob in dist.items():
        ptm += prob * orc.pauli_ptm(p)
    for i, q in enumerate(basis):
        assert math.isclose(ptm[i, i], fidelity_from_dist(dist, q), abs_tol=1e-12)


def test_marginal_definition():
    rng = np.random.default_rng(5)
    dist = _dist(2, rng)
    a = QubitSet({0})
    target = Pauli.single("X", 0, 2)
    # mu(X_0) sums the probability of every global error restricting to X_0.
    direct = sum(
        prob for p, prob in dist.items() if p.restrict(a).phaseless() == target
    )
    assert math.isclose(marginal(dist, target, a), direct, abs_tol=1e-12)
    table = fidelities_on_support(dist, QubitSet({0, 1}))
    assert math.isclose(
        marginal_from_fidelities(table, target, a), direct, abs_tol=1e-12
    )


def test_marginals_sum_to_one():
    rng = np.random.default_rng(7)
    dist = _dist(2, rng)
    a = QubitSet({1})
    total = sum(marginal(dist, p, a) for p in enumerate_subgroup(a, 2))
    assert math.isclose(total, 1.0, abs_tol=1e-12)


def test_orbit_marginal_transform_matches_direct():
    rng = np.random.default_rng(11)
    h = clifford_from_cycle([("CX", (0, 1))], 2)
    a = QubitSet({0, 1})
    for _ in range(50):
        dist = _dist(2, rng)
        orbits = orbit_partition(a, h)
        fids = {
            o: sum(fidelity_from_dist(dist, m) for m in o.members) / len(o)
            for o in orbits
        }
        for o in orbits:
            got = orbit_marginal_from_orbit_fidelities(fids, o, a)
            want = sum(marginal(dist, m, a) for m in o.members)
            assert math.isclose(got, want, abs_tol=1e-12)


def test_orbit_average_modes():
    h = clifford_from_cycle([("CX", (0, 1))], 2)
    dist = PauliDistribution(
        2, {Pauli.identity(2): 0.9, Pauli.from_string("Z@{1}", 2): 0.1}
    )
    table = fidelities_on_support(dist, QubitSet({0, 1}))
    o = [
        ob
        for ob in orbit_partition(QubitSet({0, 1}), h)
        if Pauli.from_string("X@{0}", 2) in ob
    ][0]
    arith = orbit_average(table, o, mode="arithmetic")
    geo = orbit_average(table, o, mode="geometric")
    fids = [table.value(m) for m in o.members]
    assert math.isclose(arith, sum(fids) / 2, abs_tol=1e-12)
    assert math.isclose(geo, math.sqrt(fids[0] * fids[1]), abs_tol=1e-12)


def test_twirled_rotation_matches_dense():
    n = 1
    for axis in "XYZ":
        for deg in (3.0, 15.0, 45.0):
            term = CoherentTerm(0, axis, math.radians(deg))
            dist = pauli_twirl_rotation(term, n)
            g = orc.pauli_matrix(Pauli.single(axis, 0, 1))
            u = np.cos(math.radians(deg) / 2) * np.eye(2) - 1j * np.sin(
                math.radians(deg) / 2
            ) * g
            twirled = orc.pauli_twirl(orc.ptm_of_unitary(u))
            for i, q in enumerate(orc.pauli_basis(1)):
                assert math.isclose(
                    twirled[i, i], fidelity_from_dist(dist, q), abs_tol=1e-12
                )


def test_compose_is_convolution():
    p = PauliDistribution(
        1, {Pauli.identity(1): 0.9, Pauli.single("X", 0, 1): 0.1}
    )
    q = PauliDistribution(
        1, {Pauli.identity(1): 0.8, Pauli.single("X", 0, 1): 0.2}
    )
    c = compose(p, q)
    assert math.isclose(c.prob(Pauli.identity(1)), 0.9 * 0.8 + 0.1 * 0.2, abs_tol=1e-12)
    assert math.isclose(c.prob(Pauli.single("X", 0, 1)), 0.9 * 0.2 + 0.1 * 0.8, abs_tol=1e-12)


def _letters(n):
    out = {}
    for i in range(n):
        for letter in "XYZ":
            out[(i, letter)] = Pauli.single(letter, i, n)
    return out


def test_weight2_inversion_recovers_planted_model():
    n = 3
    planted = {
        Pauli.from_string("Z@{0}", n): 0.02,
        Pauli.from_string("X@{1}", n): 0.01,
        Pauli.from_string("ZZ@{1,2}", n): 0.005,
    }
    dist = PauliDistribution(
        n, {Pauli.identity(n): 1 - sum(planted.values()), **planted}
    )
    singles = {}
    for i in range(n):
        a = QubitSet({i})
        for letter in "XYZ":
            p = Pauli.single(letter, i, n)
            singles[(i, p)] = (marginal(dist, p, a), 1e-4)
    pairs = {}
    for i in range(n):
        for j in range(i + 1, n):
            a = QubitSet({i, j})
            for p in enumerate_subgroup(a, n):
                if p.weight == 2:
                    pairs[(i, j, p)] = (marginal(dist, p, a), 1e-4)
    fit, report = weight2_inversion(singles, pairs, n)
    assert not report["violations"]
    for p, prob in planted.items():
        assert math.isclose(fit.prob(p), prob, abs_tol=1e-9)
    assert math.isclose(fit.prob(Pauli.identity(n)), dist.prob(Pauli.identity(n)), abs_tol=1e-9)


def test_weight2_inversion_flags_negative_probabilities():
    n = 2
    singles = {
        (i, Pauli.single(letter, i, n)): (0.0, 1e-6)
        for i in range(n)
        for letter in "XYZ"
    }
    pairs = {
        (0, 1, p): (0.01 if p.label() == "ZZ@{0,1}" else 0.0, 1e-6)
        for p in enumerate_subgroup(QubitSet({0, 1}), n)
        if p.weight == 2
    }
    # ZZ mass with no matching Z singles forces p(Z_0) below zero.
    fit, report = weight2_inversion(singles, pairs, n)
    assert report["violations"]
