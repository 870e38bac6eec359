"""Cycle-structured circuits and the randomized-compiling transform.

A benchmarking circuit is the alternation E_m H E_{m-1} H ... E_1 H E_0 with
identity interior easy cycles.  Randomized compiling replaces each easy slot
by a sampled twirling Pauli merged with the correction of the previous one;
the final correction is never applied physically but recorded as the Pauli
frame X^x Z^z, which the counting rule later undoes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import CoherentTerm
from .clifford import CliffordOp, clifford_from_cycle
from .pauli import Pauli, QubitSet, multiply

__all__ = [
    "Cycle",
    "CbCircuit",
    "CompiledInstance",
    "correction_gate",
    "randomized_compile",
    "parallel_supports",
    "support_unions",
]


@dataclass(frozen=True)
class Cycle:
    """One scheduled round of parallel gates."""

    kind: str  # "easy" or "hard"
    gates: tuple[tuple[str, tuple[int, ...]], ...]
    n: int
    params: tuple[CoherentTerm, ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("easy", "hard"):
            raise ValueError(f"cycle kind must be easy or hard, got {self.kind!r}")
        used: set[int] = set()
        for _, qubits in self.gates:
            if used & set(qubits):
                raise ValueError("overlapping gate supports in cycle")
            used |= set(qubits)
        # Normalizes gate tuples and validates names/supports eagerly.
        object.__setattr__(
            self,
            "gates",
            tuple((name, tuple(q)) for name, q in self.gates),
        )
        self.clifford()

    def clifford(self) -> CliffordOp:
        return clifford_from_cycle(list(self.gates), self.n)

    @classmethod
    def identity(cls, n: int, kind: str = "easy") -> "Cycle":
        return cls(kind, tuple(("I", (q,)) for q in range(n)), n)

    def describe(self) -> str:
        if not self.gates:
            return "I"
        parts = []
        for name, qubits in sorted(self.gates, key=lambda g: g[1]):
            if name == "I":
                continue
            parts.append(f"({','.join(map(str, qubits))}):{name}")
        return "; ".join(parts) if parts else "I"


@dataclass(frozen=True)
class CbCircuit:
    """E_m H E_{m-1} H ... E_1 H E_0 with identity interior easy cycles."""

    e0: Cycle
    hard: Cycle
    em: Cycle
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one hard-cycle repetition")
        if self.hard.kind != "hard":
            raise ValueError("middle cycle must be hard")
        if not (self.e0.n == self.hard.n == self.em.n):
            raise ValueError("cycle qubit counts differ")

    @property
    def n(self) -> int:
        return self.hard.n

    def ideal(self) -> CliffordOp:
        """End-to-end ideal Clifford of the base circuit."""
        h = self.hard.clifford()
        op = self.e0.clifford()
        for _ in range(self.m):
            op = h @ op
        return self.em.clifford() @ op


@dataclass(frozen=True)
class CompiledInstance:
    """One randomization: concrete Pauli dressings plus the recorded frame.

    Easy slot i is replaced by T_i^c E_i T_{i-1} with T_-1 = I, so
    ``easy_paulis[i]`` (the merged Pauli right before hard cycle i) equals
    T_i^c times T_{i-1}.  The last slot becomes T_m^c E_m T_{m-1}; the final
    correction T_m^c is the frame X^x Z^z whose x the counting rule undoes.
    All interior insertions telescope, so the instance's ideal action equals
    the frame composed with the base circuit exactly.
    """

    base: CbCircuit
    twirls: tuple[Pauli, ...]
    easy_paulis: tuple[Pauli, ...]
    pre_em: Pauli
    frame: Pauli

    @property
    def n(self) -> int:
        return self.base.n

    def ideal(self) -> CliffordOp:
        """Ideal Clifford of the physical instance, frame included."""
        h = self.base.hard.clifford()
        op = self.base.e0.clifford()
        for p in self.easy_paulis:
            op = _pauli_clifford(p) @ op
            op = h @ op
        op = _pauli_clifford(self.pre_em) @ op
        op = self.base.em.clifford() @ op
        return _pauli_clifford(self.frame) @ op


def _pauli_clifford(p: Pauli) -> CliffordOp:
    """The conjugation action of a Pauli as a tableau (signs only)."""
    n = p.n
    xs = []
    zs = []
    for q in range(n):
        gx = Pauli.single("X", q, n)
        gz = Pauli.single("Z", q, n)
        sx = 1 if (p.z >> q) & 1 == 0 else -1
        sz = 1 if (p.x >> q) & 1 == 0 else -1
        xs.append(gx if sx == 1 else Pauli.hermitian(n, gx.x, gx.z, -1))
        zs.append(gz if sz == 1 else Pauli.hermitian(n, gz.x, gz.z, -1))
    return CliffordOp(n, tuple(xs), tuple(zs))


def correction_gate(h: CliffordOp, t: Pauli) -> Pauli:
    """T^c = H† T H, phaseless; applying T after H equals H after T^c."""
    return h.inverse().conjugate(t).phaseless()


def randomized_compile(base: CbCircuit, rng: np.random.Generator) -> CompiledInstance:
    """Sample uniform twirling Paulis and merge corrections into easy slots."""
    n = base.n
    h_inv = base.hard.clifford().inverse()
    twirls: list[Pauli] = []
    easy: list[Pauli] = []
    prev = Pauli.identity(n)  # T_{i-1}, starting from T_{-1} = I
    for _ in range(base.m + 1):
        x = int(rng.integers(0, 1 << n))
        z = int(rng.integers(0, 1 << n))
        t = Pauli.hermitian(n, x, z)
        correction = h_inv.conjugate(t).phaseless()
        twirls.append(t)
        easy.append(multiply(correction, prev).phaseless())
        prev = t
    # The last entry splits around E_m: T_{m-1} before it, T_m^c after it.
    frame = h_inv.conjugate(twirls[-1]).phaseless()
    pre_em = twirls[-2] if base.m >= 1 else Pauli.identity(n)
    return CompiledInstance(base, tuple(twirls), tuple(easy[:-1]), pre_em, frame)


def parallel_supports(cycle: Cycle) -> list[QubitSet]:
    """Gate supports of a hard cycle, ascending canonical order."""
    if cycle.kind != "hard":
        raise ValueError("parallel supports are defined for hard cycles")
    supports = [QubitSet(qubits) for _, qubits in cycle.gates]
    supports.sort(key=lambda s: s.indices)
    return supports


def support_unions(supports: Sequence[QubitSet], k: int) -> list[QubitSet]:
    """All (s choose k) unions of k distinct gate supports, deduplicated."""
    s = len(supports)
    if not 1 <= k <= s:
        raise ValueError(f"k={k} outside 1..{s}")
    seen: set[tuple[int, ...]] = set()
    out: list[QubitSet] = []
    for combo in itertools.combinations(supports, k):
        u = QubitSet(q for sub in combo for q in sub)
        if u.indices not in seen:
            seen.add(u.indices)
            out.append(u)
    out.sort(key=lambda u: u.indices)
    return out
