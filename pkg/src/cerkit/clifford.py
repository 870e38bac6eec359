"""Clifford operators as symplectic tableaus, plus orbit machinery.

A Clifford C is stored by the signed images of the 2n Pauli generators:
``C X_i C†`` and ``C Z_i C†``.  Conjugation of an arbitrary Pauli follows by
multiplying generator images, which keeps sign tracking exact.  Orbits of the
repeated conjugation action partition any invariant Pauli subgroup; they are
the finest structure a Pauli-twirled decay experiment can resolve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .pauli import Pauli, QubitSet, enumerate_subgroup, multiply

__all__ = [
    "CliffordOp",
    "OrbitSet",
    "clifford_from_cycle",
    "clifford_from_local_gates",
    "orbit",
    "orbit_partition",
    "invariance_check",
    "pauli_order",
    "GATE_NAMES",
    "PAULI_ORDER_CAP",
]

PAULI_ORDER_CAP = 2 ** 12

# Generator images of the named gates, given per local qubit slot.
# Each entry maps slot index -> (letters, sign) for the X and Z generators.
# Two-qubit entries use slot 0 = first listed qubit, slot 1 = second.
_GATE_IMAGES: dict[str, tuple[list[tuple[str, int]], list[tuple[str, int]]]] = {
    # name: ([image of X_slot ...], [image of Z_slot ...])
    "I": ([("X", 1)], [("Z", 1)]),
    "X": ([("X", 1)], [("Z", -1)]),
    "Y": ([("X", -1)], [("Z", -1)]),
    "Z": ([("X", -1)], [("Z", 1)]),
    "H": ([("Z", 1)], [("X", 1)]),
    "S": ([("Y", 1)], [("Z", 1)]),
    "Sdg": ([("Y", -1)], [("Z", 1)]),
    # Compound single-qubit basis changes used by boundary cycles:
    # "SH" applies H then S (prepares Y from Z); "HSdg" applies Sdg then H
    # (rotates Y to Z for readout).
    "SH": ([("Z", 1)], [("Y", 1)]),
    "HSdg": ([("Y", 1)], [("X", 1)]),
    "CX": ([("XX", 1), ("IX", 1)], [("ZI", 1), ("ZZ", 1)]),
    "CZ": ([("XZ", 1), ("ZX", 1)], [("ZI", 1), ("IZ", 1)]),
    "SWAP": ([("IX", 1), ("XI", 1)], [("IZ", 1), ("ZI", 1)]),
}

GATE_NAMES = tuple(_GATE_IMAGES)
_GATE_ARITY = {name: len(imgs[0]) for name, imgs in _GATE_IMAGES.items()}


@dataclass(frozen=True)
class CliffordOp:
    """A Clifford unitary, represented by signed generator images."""

    n: int
    x_images: tuple[Pauli, ...]
    z_images: tuple[Pauli, ...]

    def __post_init__(self):
        if len(self.x_images) != self.n or len(self.z_images) != self.n:
            raise ValueError("need one image per X and Z generator")

    @classmethod
    def identity(cls, n: int) -> "CliffordOp":
        xs = tuple(Pauli.single("X", q, n) for q in range(n))
        zs = tuple(Pauli.single("Z", q, n) for q in range(n))
        return cls(n, xs, zs)

    def conjugate(self, p: Pauli) -> Pauli:
        """Return ``C p C†`` with exact sign."""
        if p.n != self.n:
            raise ValueError(f"qubit-count mismatch: {p.n} vs {self.n}")
        out = Pauli(self.n, 0, 0, p.phase)
        for q in range(self.n):
            if (p.x >> q) & 1:
                out = multiply(out, self.x_images[q])
        for q in range(self.n):
            if (p.z >> q) & 1:
                out = multiply(out, self.z_images[q])
        return out

    def __matmul__(self, first: "CliffordOp") -> "CliffordOp":
        """Composition ``self ∘ first`` (``first`` acts earlier in time)."""
        if first.n != self.n:
            raise ValueError("qubit-count mismatch in composition")
        xs = tuple(self.conjugate(p) for p in first.x_images)
        zs = tuple(self.conjugate(p) for p in first.z_images)
        return CliffordOp(self.n, xs, zs)

    def inverse(self) -> "CliffordOp":
        # The symplectic inverse of the phaseless action, then fix signs by
        # round-tripping each generator through the forward conjugation.
        n = self.n
        xs: list[Pauli] = []
        zs: list[Pauli] = []
        for kind, gen_builder in (("X", Pauli.single), ("Z", Pauli.single)):
            for q in range(n):
                g = gen_builder(kind, q, n)
                v = self._preimage(g)
                w = self.conjugate(v)
                if (w.x, w.z) != (g.x, g.z):
                    raise AssertionError("inverse round-trip failed")
                img = v if w.sign == g.sign else multiply(
                    Pauli.hermitian(n, 0, 0, -1), v
                )
                (xs if kind == "X" else zs).append(img)
        return CliffordOp(n, tuple(xs), tuple(zs))

    def _preimage(self, g: Pauli) -> Pauli:
        """Phaseless solve of ``C v C† = ±g`` by GF(2) elimination."""
        n = self.n
        # Columns: symplectic vectors of the generator images; solve M a = g.
        cols = [*self.x_images, *self.z_images]
        rows = 2 * n
        mat = []
        for r in range(rows):
            bits = 0
            for c, p in enumerate(cols):
                bit = (p.x >> r) & 1 if r < n else (p.z >> (r - n)) & 1
                bits |= bit << c
            mat.append(bits)
        rhs = 0
        for r in range(rows):
            bit = (g.x >> r) & 1 if r < n else (g.z >> (r - n)) & 1
            rhs |= bit << r
        # Gaussian elimination with the rhs appended as column index 2n.
        aug = [mat[r] | (((rhs >> r) & 1) << (2 * n)) for r in range(rows)]
        pivots: list[tuple[int, int]] = []
        row = 0
        for col in range(2 * n):
            pivot = next(
                (r for r in range(row, rows) if (aug[r] >> col) & 1), None
            )
            if pivot is None:
                continue
            aug[row], aug[pivot] = aug[pivot], aug[row]
            for r in range(rows):
                if r != row and (aug[r] >> col) & 1:
                    aug[r] ^= aug[row]
            pivots.append((row, col))
            row += 1
        a = 0
        for r, col in pivots:
            if (aug[r] >> (2 * n)) & 1:
                a |= 1 << col
        x = a & ((1 << n) - 1)
        z = a >> n
        return Pauli.hermitian(n, x, z)

    def phaseless_key(self) -> tuple[tuple[int, int], ...]:
        return tuple((p.x, p.z) for p in (*self.x_images, *self.z_images))

    def is_phaseless_identity(self) -> bool:
        return self.phaseless_key() == CliffordOp.identity(self.n).phaseless_key()

    def symplectic_check(self) -> bool:
        """Conjugation must preserve all generator commutation relations."""
        from .pauli import chi

        gens = [*self.x_images, *self.z_images]
        base = [
            *(Pauli.single("X", q, self.n) for q in range(self.n)),
            *(Pauli.single("Z", q, self.n) for q in range(self.n)),
        ]
        for i in range(2 * self.n):
            for j in range(i + 1, 2 * self.n):
                if chi(gens[i], gens[j]) != chi(base[i], base[j]):
                    return False
        return True


@dataclass(frozen=True)
class OrbitSet:
    """The conjugation orbit {H^j P H^-j} of a phaseless Pauli.

    ``members`` starts at the canonically smallest member and then follows
    successive conjugations, so the tuple is deterministic for a given H.
    """

    members: tuple[Pauli, ...]
    generator_label: str = ""

    def __post_init__(self):
        if not self.members:
            raise ValueError("orbit cannot be empty")

    @property
    def representative(self) -> Pauli:
        return self.members[0]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, p: Pauli) -> bool:
        return any((m.x, m.z) == (p.x, p.z) for m in self.members)

    def label(self) -> str:
        return "{" + ", ".join(m.label() for m in self.members) + "}"

    def key(self) -> tuple:
        return self.representative.key()

    def __hash__(self) -> int:
        return hash(frozenset((m.x, m.z) for m in self.members))

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrbitSet):
            return NotImplemented
        return frozenset((m.x, m.z) for m in self.members) == frozenset(
            (m.x, m.z) for m in other.members
        )


def clifford_from_cycle(
    gates: Sequence[tuple[str, QubitSet | Iterable[int]]], n: int
) -> CliffordOp:
    """Parallel composition of named gates with pairwise-disjoint supports.

    Two-qubit gate supports are ordered tuples: ("CX", (control, target)).
    """
    xs = list(CliffordOp.identity(n).x_images)
    zs = list(CliffordOp.identity(n).z_images)
    used: set[int] = set()
    for name, support in gates:
        if name not in _GATE_IMAGES:
            raise ValueError(f"unknown gate name {name!r}")
        qubits = tuple(support) if not isinstance(support, QubitSet) else support.indices
        if len(qubits) != _GATE_ARITY[name]:
            raise ValueError(
                f"gate {name} needs {_GATE_ARITY[name]} qubits, got {qubits}"
            )
        if any(q >= n or q < 0 for q in qubits):
            raise ValueError(f"gate {name} support {qubits} out of range")
        if used & set(qubits):
            raise ValueError(f"overlapping gate supports at {qubits}")
        used |= set(qubits)
        x_imgs, z_imgs = _GATE_IMAGES[name]
        for slot, q in enumerate(qubits):
            letters_x, sign_x = x_imgs[slot]
            letters_z, sign_z = z_imgs[slot]
            xs[q] = Pauli.from_letters(
                dict(zip(qubits, letters_x)), n, sign_x
            )
            zs[q] = Pauli.from_letters(
                dict(zip(qubits, letters_z)), n, sign_z
            )
    return CliffordOp(n, tuple(xs), tuple(zs))


def clifford_from_local_gates(per_qubit: dict[int, Sequence[str]], n: int) -> CliffordOp:
    """Tensor product of single-qubit gate sequences, listed in time order."""
    op = CliffordOp.identity(n)
    for q, names in per_qubit.items():
        for name in names:
            if _GATE_ARITY.get(name) != 1:
                raise ValueError(f"{name!r} is not a single-qubit gate")
            op = clifford_from_cycle([(name, (q,))], n) @ op
    return op


def orbit(p: Pauli, h: CliffordOp, label: str = "") -> OrbitSet:
    """All distinct phaseless conjugates {H^j P H^-j}."""
    seen = [(p.x, p.z)]
    cur = p.phaseless()
    chain = [cur]
    while True:
        cur = h.conjugate(cur).phaseless()
        if (cur.x, cur.z) == seen[0]:
            break
        if (cur.x, cur.z) in seen:
            raise AssertionError("conjugation orbit re-entered off-start")
        seen.append((cur.x, cur.z))
        chain.append(cur)
    # Rotate so the canonically smallest member leads; the conjugation order
    # of the remaining members is preserved.
    start = min(range(len(chain)), key=lambda i: chain[i].key())
    members = tuple(chain[start:] + chain[:start])
    return OrbitSet(members, label)


def orbit_partition(a: QubitSet, h: CliffordOp, label: str = "") -> list[OrbitSet]:
    """Orbits partitioning the Pauli subgroup on support A, canonical order."""
    if not invariance_check(a, h):
        raise ValueError(f"subgroup on {a} is not invariant under the cycle")
    orbits: list[OrbitSet] = []
    seen: set[tuple[int, int]] = set()
    for p in enumerate_subgroup(a, h.n):
        if (p.x, p.z) in seen:
            continue
        o = orbit(p, h, label)
        orbits.append(o)
        seen.update((m.x, m.z) for m in o.members)
    total = sum(len(o) for o in orbits)
    if total != 4 ** len(a):
        raise AssertionError("orbits do not partition the subgroup")
    orbits.sort(key=OrbitSet.key)
    return orbits


def invariance_check(a: QubitSet, h: CliffordOp) -> bool:
    """True iff conjugation by H maps the subgroup on A into itself."""
    mask = a.mask()
    for q in a:
        for gen in (Pauli.single("X", q, h.n), Pauli.single("Z", q, h.n)):
            img = h.conjugate(gen)
            if (img.x | img.z) & ~mask:
                return False
    return True


def pauli_order(h: CliffordOp) -> int:
    """Smallest c >= 1 with H^c equal to a Pauli (phaseless tableau identity)."""
    cur = h
    for c in range(1, PAULI_ORDER_CAP + 1):
        if cur.is_phaseless_identity():
            return c
        cur = h @ cur
    raise ValueError(f"tableau order exceeds cap {PAULI_ORDER_CAP}")
