"""n-qubit Pauli operators in binary-symplectic form.

A Pauli is stored as a pair of bit masks ``(x, z)`` over ``n`` qubits plus a
phase exponent ``k`` such that the operator equals ``i**k * X^x Z^z`` (with
``X^x = prod_q X_q^{x_q}`` and similarly for Z).  The Hermitian single-qubit
letters are encoded as

    I = (0, 0),   X = (1, 0),   Y = (1, 1),   Z = (0, 1),

so the canonical Hermitian Pauli ``sigma(x, z)`` carries the phase
``i**popcount(x & z)`` in the raw ``X^x Z^z`` convention (one factor of ``i``
per Y letter).  Probabilities and fidelities index Paulis phaselessly; the
phase only matters inside Clifford conjugation and the decay counting rule.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Pauli",
    "QubitSet",
    "chi",
    "multiply",
    "pauli_parse",
    "enumerate_subgroup",
    "SUBGROUP_CAP",
]

# Letter order used for all canonical (byte-stable) orderings.
_LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
# (x, z) -> position in I < X < Y < Z
_LETTER_INDEX = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}

SUBGROUP_CAP = 12


def _popcount(v: int) -> int:
    return v.bit_count()


class QubitSet(frozenset):
    """A sorted set of qubit indices; hashable and usable as a dict key."""

    def __new__(cls, indices: Iterable[int] = ()) -> "QubitSet":
        idx = tuple(indices)
        if any(i < 0 for i in idx):
            raise ValueError("qubit indices must be non-negative")
        return super().__new__(cls, idx)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(sorted(self))

    def complement(self, n: int) -> "QubitSet":
        if self and max(self) >= n:
            raise ValueError(f"qubit set {self} does not fit in {n} qubits")
        return QubitSet(i for i in range(n) if i not in self)

    def mask(self) -> int:
        m = 0
        for i in self:
            m |= 1 << i
        return m

    def __repr__(self) -> str:
        return "{" + ",".join(str(i) for i in self.indices) + "}"


@dataclass(frozen=True)
class Pauli:
    """An n-qubit Pauli operator ``i**phase * X^x Z^z``."""

    n: int
    x: int
    z: int
    phase: int = field(default=0)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if self.x >> self.n or self.z >> self.n:
            raise ValueError("bit mask exceeds qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "Pauli":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_letters(cls, letters: dict[int, str], n: int, sign: int = 1) -> "Pauli":
        x = z = 0
        for q, letter in letters.items():
            if q >= n or q < 0:
                raise ValueError(f"qubit {q} out of range for n={n}")
            try:
                bx, bz = _LETTER_BITS[letter]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {letter!r}") from None
            x |= bx << q
            z |= bz << q
        return cls.hermitian(n, x, z, sign)

    @classmethod
    def hermitian(cls, n: int, x: int, z: int, sign: int = 1) -> "Pauli":
        """The Hermitian Pauli ``sign * sigma(x, z)`` with sign in {+1, -1}."""
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        phase = (_popcount(x & z) + (0 if sign == 1 else 2)) % 4
        return cls(n, x, z, phase)

    @classmethod
    def single(cls, letter: str, qubit: int, n: int) -> "Pauli":
        return cls.from_letters({qubit: letter}, n)

    @classmethod
    def from_string(cls, text: str, n: int | None = None) -> "Pauli":
        """Parse the canonical form ``"ZXX@{0,2,5}"`` (or ``"I"`` for identity)."""
        text = text.strip()
        if text in ("I", ""):
            if n is None:
                raise ValueError("identity string needs an explicit qubit count")
            return cls.identity(n)
        m = re.fullmatch(r"([IXYZ]+)@\{([\d,\s]*)\}", text)
        if not m:
            raise ValueError(f"malformed Pauli string {text!r}")
        label, idx_text = m.groups()
        indices = [int(t) for t in idx_text.split(",") if t.strip()]
        support = QubitSet(indices)
        if len(indices) != len(support):
            raise ValueError(f"duplicate qubit index in {text!r}")
        if n is None:
            n = max(indices) + 1
        return pauli_parse(label, support, n)

    # -- structure ---------------------------------------------------------

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def support(self) -> QubitSet:
        m = self.x | self.z
        return QubitSet(i for i in range(self.n) if (m >> i) & 1)

    @property
    def is_hermitian(self) -> bool:
        return (self.phase - _popcount(self.x & self.z)) % 2 == 0

    @property
    def sign(self) -> int:
        """The sign of a Hermitian Pauli: +1 or -1."""
        d = (self.phase - _popcount(self.x & self.z)) % 4
        if d == 0:
            return 1
        if d == 2:
            return -1
        raise ValueError("Pauli carries an imaginary phase; no real sign")

    def phaseless(self) -> "Pauli":
        return Pauli.hermitian(self.n, self.x, self.z)

    def letter(self, qubit: int) -> str:
        return _LETTERS[_LETTER_INDEX[((self.x >> qubit) & 1, (self.z >> qubit) & 1)]]

    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def restrict(self, support: QubitSet) -> "Pauli":
        """The part of this Pauli supported inside ``support`` (phaseless)."""
        m = support.mask()
        return Pauli.hermitian(self.n, self.x & m, self.z & m)

    def key(self) -> tuple[int, ...]:
        """Canonical sort key: per-qubit letters, qubit 0 most significant."""
        return tuple(
            _LETTER_INDEX[((self.x >> q) & 1, (self.z >> q) & 1)]
            for q in range(self.n)
        )

    def label(self) -> str:
        """Canonical string form, e.g. ``"ZXX@{0,2,5}"``; identity is ``"I"``."""
        sup = self.support.indices
        if not sup:
            return "I"
        letters = "".join(self.letter(q) for q in sup)
        return f"{letters}@{{{','.join(str(q) for q in sup)}}}"

    def __repr__(self) -> str:
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[
            (self.phase - _popcount(self.x & self.z)) % 4
        ]
        return f"{sign}{self.label()}"

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other: "Pauli") -> "Pauli":
        return multiply(self, other)

    def adjoint(self) -> "Pauli":
        # sigma(x, z) is Hermitian; only the explicit phase conjugates.
        w = _popcount(self.x & self.z)
        return Pauli(self.n, self.x, self.z, (2 * w - self.phase) % 4)

    def commutes(self, other: "Pauli") -> bool:
        return chi(self, other) == 1


def _check_same_n(p: Pauli, q: Pauli) -> None:
    if p.n != q.n:
        raise ValueError(f"qubit-count mismatch: {p.n} vs {q.n}")


def chi(p: Pauli, q: Pauli) -> int:
    """+1 if the Paulis commute, -1 otherwise."""
    _check_same_n(p, q)
    s = _popcount(p.x & q.z) + _popcount(p.z & q.x)
    return 1 - 2 * (s & 1)


def multiply(p: Pauli, q: Pauli) -> Pauli:
    """Exact product; ``Z^z X^x = (-1)^(z.x) X^x Z^z`` supplies the sign."""
    _check_same_n(p, q)
    phase = (p.phase + q.phase + 2 * _popcount(p.z & q.x)) % 4
    return Pauli(p.n, p.x ^ q.x, p.z ^ q.z, phase)


def pauli_parse(label: str, support: QubitSet | Iterable[int], n: int) -> Pauli:
    """Build a Pauli from a letter string over an explicit support.

    ``pauli_parse("IX", {0, 2}, 5)`` acts as X on qubit 2 and identity
    elsewhere.  The label is matched to the support in ascending qubit order.
    """
    support = QubitSet(support)
    if support and max(support) >= n:
        raise ValueError(f"support {support} exceeds register size {n}")
    if len(label) != len(support):
        raise ValueError(
            f"label {label!r} has {len(label)} letters for {len(support)} qubits"
        )
    return Pauli.from_letters(dict(zip(support.indices, label)), n)


def enumerate_subgroup(support: QubitSet | Iterable[int], n: int) -> list[Pauli]:
    """All 4^|A| phaseless Paulis supported inside A, canonically ordered."""
    support = QubitSet(support)
    if support and max(support) >= n:
        raise ValueError(f"support {support} exceeds register size {n}")
    if len(support) > SUBGROUP_CAP:
        raise ValueError(
            f"support of size {len(support)} exceeds enumeration cap {SUBGROUP_CAP}"
        )
    qubits = support.indices
    out = []
    for letters in itertools.product(_LETTERS, repeat=len(qubits)):
        out.append(Pauli.from_letters(dict(zip(qubits, letters)), n))
    out.sort(key=Pauli.key)
    return out
