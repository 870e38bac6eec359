import numpy as np
import pytest

from cerkit.circuits import (
    CbCircuit,
    Cycle,
    correction_gate,
    parallel_supports,
    randomized_compile,
    support_unions,
)
from cerkit.pauli import Pauli, QubitSet, chi


def _base(m=3):
    hard = Cycle("hard", (("CX", (0, 1)),), 2, label="cx")
    easy = Cycle.identity(2)
    return CbCircuit(easy, hard, easy, m)


def test_cycle_rejects_overlap_and_bad_kind():
    with pytest.raises(ValueError):
        Cycle("hard", (("CX", (0, 1)), ("I", (1,))), 2)
    with pytest.raises(ValueError):
        Cycle("medium", (("I", (0,)),), 1)


def test_cycle_describe_is_stable():
    c = Cycle("hard", (("I", (0,)), ("CX", (1, 3)), ("I", (2,))), 4)
    assert c.describe() == Cycle("hard", (("CX", (1, 3)), ("I", (2,)), ("I", (0,))), 4).describe()


def test_correction_gate_restores_ideal():
    h = _base().hard.clifford()
    for p in (Pauli.from_string("X@{0}", 2), Pauli.from_string("ZY@{0,1}", 2)):
        tc = correction_gate(h, p)
        # T^c H T must equal H up to no Pauli at all: conjugation check.
        assert h.conjugate(p).phaseless() == tc.phaseless()


@pytest.mark.parametrize("m", [1, 2, 5])
def test_compiled_instance_preserves_ideal_up_to_frame(m):
    base = _base(m)
    rng = np.random.default_rng(0)
    for _ in range(20):
        inst = randomized_compile(base, rng)
        lhs = inst.ideal()
        rhs = base.ideal()
        # Instance = frame o base exactly, signs included.
        frame_op = lhs @ rhs.inverse()
        assert frame_op.is_phaseless_identity()
        for q in range(base.n):
            for letter in "XZ":
                p = Pauli.single(letter, q, base.n)
                through_base = rhs.conjugate(p)
                want = Pauli.hermitian(
                    base.n,
                    through_base.x,
                    through_base.z,
                    through_base.sign * chi(inst.frame, through_base),
                )
                assert lhs.conjugate(p) == want


def test_randomized_compile_slot_convention():
    base = _base(2)
    rng = np.random.default_rng(7)
    h = base.hard.clifford()
    inst = randomized_compile(base, rng)
    # m + 1 twirls T_0..T_m; interior easy slot i carries T_i^c T_{i-1}.
    assert len(inst.twirls) == 3
    assert len(inst.easy_paulis) == 2
    t_prev = Pauli.identity(2)
    for t, merged in zip(inst.twirls, inst.easy_paulis):
        want = (correction_gate(h, t) * t_prev).phaseless()
        assert merged.phaseless() == want
        t_prev = t
    # The last slot splits around E_m: T_{m-1} before it, frame T_m^c after.
    assert inst.pre_em.phaseless() == inst.twirls[-2].phaseless()
    assert inst.frame.phaseless() == correction_gate(h, inst.twirls[-1])


def test_parallel_supports():
    c = Cycle("hard", (("I", (0,)), ("CX", (1, 3)), ("I", (2,)), ("I", (4,))), 5)
    sup = parallel_supports(c)
    assert sorted(tuple(s.indices) for s in sup) == [(0,), (1, 3), (2,), (4,)]


def test_support_unions():
    sup = [QubitSet({0}), QubitSet({1, 3}), QubitSet({2})]
    singles = support_unions(sup, 1)
    assert singles == sup
    pairs = support_unions(sup, 2)
    assert len(pairs) == 3
    assert QubitSet({0, 1, 3}) in pairs
    with pytest.raises(ValueError):
        support_unions(sup, 4)
