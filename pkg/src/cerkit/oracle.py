"""Brute-force channel arithmetic on up to three qubits.

Everything here works with dense Pauli transfer matrices (PTMs): real
4^n x 4^n matrices whose (P, Q) entry is the normalized inner product
2^-n tr(P U Q U†).  The module is a test oracle, not a simulator; hard size
caps keep every call exhaustive and exact.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from .clifford import CliffordOp
from .pauli import Pauli, QubitSet, chi, enumerate_subgroup

__all__ = [
    "pauli_basis",
    "pauli_matrix",
    "clifford_unitary",
    "ptm_of_unitary",
    "ptm_of_kraus",
    "pauli_ptm",
    "pauli_twirl",
    "effective_dressed_cycle",
    "average_rc_circuit",
    "process_fidelity",
    "state_prep_vector",
    "measurement_vector",
]

_MAX_N = 3
_MAX_RC_N = 2
_MAX_RC_M = 3

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_basis(n: int) -> list[Pauli]:
    """The 4^n phaseless Paulis in canonical order; fixes PTM row order."""
    if n > _MAX_N:
        raise ValueError(f"dense oracle capped at {_MAX_N} qubits")
    return enumerate_subgroup(QubitSet(range(n)), n)


def pauli_matrix(p: Pauli) -> np.ndarray:
    """Dense matrix of a Hermitian Pauli, including its sign."""
    out = np.array([[p.sign]], dtype=complex)
    # Qubit 0 is the least-significant bit of the outcome string; keep it as
    # the last tensor factor so basis index bit i corresponds to qubit i.
    for q in range(p.n - 1, -1, -1):
        out = np.kron(out, _SINGLE[p.letter(q)])
    return out


def clifford_unitary(c: CliffordOp) -> np.ndarray:
    """Dense unitary of a Clifford tableau, fixed up to global phase."""
    n = c.n
    d = 2 ** n
    # Solve U Z_i = z_img U and U X_i = x_img U as one big linear system by
    # projecting onto the commutant; cheaper and simpler: build from the
    # stabilizer state picture via Gram-Schmidt on Pauli constraints.
    # Start with the state |psi_0> = U|0..0>, the +1 eigenvector of all
    # C Z_i C†; then U|s> = (C X^s C†) |psi_0> up to the phases carried by
    # the conjugated Paulis.
    proj = np.eye(d, dtype=complex)
    for q in range(n):
        stab = pauli_matrix(c.conjugate(Pauli.single("Z", q, n)))
        proj = proj @ (np.eye(d) + stab) / 2.0
    # Any nonzero column of the projector is the stabilized state.
    col = np.argmax(np.linalg.norm(proj, axis=0))
    psi0 = proj[:, col]
    psi0 = psi0 / np.linalg.norm(psi0)
    u = np.zeros((d, d), dtype=complex)
    for s in range(d):
        p = Pauli.hermitian(n, s, 0)
        u[:, s] = pauli_matrix(c.conjugate(p)) @ psi0
    return u


def _check_unitary(u: np.ndarray) -> int:
    d = u.shape[0]
    if u.shape != (d, d) or not (d & (d - 1)) == 0:
        raise ValueError("input must be square with power-of-two dimension")
    n = d.bit_length() - 1
    if n > _MAX_N:
        raise ValueError(f"dense oracle capped at {_MAX_N} qubits")
    if np.linalg.norm(u @ u.conj().T - np.eye(d)) > 1e-10:
        raise ValueError("input is not unitary to 1e-10")
    return n


def ptm_of_unitary(u: np.ndarray) -> np.ndarray:
    """PTM entry (P, Q) = 2^-n tr(P U Q U†)."""
    n = _check_unitary(u)
    basis = [pauli_matrix(p) for p in pauli_basis(n)]
    d = 2 ** n
    out = np.empty((len(basis), len(basis)))
    for j, q in enumerate(basis):
        uq = u @ q @ u.conj().T
        for i, p in enumerate(basis):
            out[i, j] = np.real(np.trace(p @ uq)) / d
    return out


def ptm_of_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """PTM of a channel given by Kraus operators."""
    d = kraus[0].shape[0]
    n = d.bit_length() - 1
    basis = [pauli_matrix(p) for p in pauli_basis(n)]
    out = np.empty((len(basis), len(basis)))
    for j, q in enumerate(basis):
        mapped = sum(k @ q @ k.conj().T for k in kraus)
        for i, p in enumerate(basis):
            out[i, j] = np.real(np.trace(p @ mapped)) / d
    return out


def random_cptp_ptm(n: int, rng: np.random.Generator, strength: float = 0.1) -> np.ndarray:
    """A random CPTP map near the identity, via a Stinespring dilation."""
    d = 2 ** n
    env = 4
    g = rng.normal(size=(d * env, d)) + 1j * rng.normal(size=(d * env, d))
    # Isometry close to (identity tensor |0>): blend then re-orthonormalize.
    base = np.zeros((d * env, d), dtype=complex)
    base[:d, :] = np.eye(d)
    v, _ = np.linalg.qr(base + strength * g)
    # Fix gauge so the isometry stays near the identity block.
    phases = np.diag(np.sign(np.real(np.diag(v[:d, :]))))
    v = v @ phases
    kraus = [v[i * d : (i + 1) * d, :] for i in range(env)]
    return ptm_of_kraus(kraus)


def pauli_ptm(p: Pauli) -> np.ndarray:
    """Diagonal PTM of conjugation by a Pauli: entries chi(P, Q)."""
    basis = pauli_basis(p.n)
    return np.diag([float(chi(p, q)) for q in basis])


def pauli_twirl(m: np.ndarray) -> np.ndarray:
    """(1/4^n) sum_P phi(P)† M phi(P); diagonal for any input."""
    dim = m.shape[0]
    n = (dim.bit_length() - 1) // 2
    if 4 ** n != dim:
        raise ValueError("matrix dimension is not 4^n")
    acc = np.zeros_like(m)
    for p in pauli_basis(n):
        d = pauli_ptm(p)
        acc += d @ m @ d
    return acc / dim


def effective_dressed_cycle(
    h: CliffordOp,
    e: CliffordOp,
    noisy_hard: np.ndarray,
    noisy_easy: Callable[[CliffordOp], np.ndarray],
) -> np.ndarray:
    """Exact twirl average of one adjusted dressed cycle.

    (1/|P_n|^2) sum over (T_i, T_{i-1}) of
    phi(T_i) . noisy_hard . noisy_easy(T_i^c E T_{i-1}) . phi(T_{i-1})†.
    """
    n = h.n
    if n > _MAX_RC_N:
        raise ValueError(f"exact twirl average capped at {_MAX_RC_N} qubits")
    paulis = pauli_basis(n)
    h_inv = h.inverse()
    acc = np.zeros((4 ** n, 4 ** n))
    for t_i in paulis:
        left = pauli_ptm(t_i)
        t_c = _pauli_op(h_inv.conjugate(t_i).phaseless())
        for t_prev in paulis:
            composed = _compose_cliffords([_pauli_op(t_prev), e, t_c])
            acc += left @ noisy_hard @ noisy_easy(composed) @ pauli_ptm(t_prev)
    return acc / len(paulis) ** 2


def _pauli_op(p: Pauli) -> CliffordOp:
    from .circuits import _pauli_clifford

    return _pauli_clifford(p)


def _compose_cliffords(ops: Sequence[CliffordOp]) -> CliffordOp:
    """Compose in time order: ops[0] acts first."""
    out = ops[0]
    for op in ops[1:]:
        out = op @ out
    return out


def average_rc_circuit(
    easy: Sequence[CliffordOp],
    hard: Sequence[CliffordOp],
    noisy_easy: Callable[[int, CliffordOp], np.ndarray],
    noisy_hard: Callable[[int], np.ndarray],
) -> np.ndarray:
    """Exact average over all twirl tuples of the compiled noisy circuit.

    ``easy`` lists E_0..E_m, ``hard`` lists H_0..H_{m-1}.  The compiled easy
    cycle i is T_i^c E_i T_{i-1} (T_-1 = I); slot m applies E_m T_{m-1} with
    no trailing correction.  ``noisy_easy(i, op)`` returns the PTM of the
    composed easy Clifford ``op`` in slot i; gate dependence may hinge on
    any property of ``op``.
    """
    m = len(hard)
    if len(easy) != m + 1:
        raise ValueError("need one more easy cycle than hard cycles")
    n = hard[0].n
    if n > _MAX_RC_N or m > _MAX_RC_M:
        raise ValueError(
            f"exact RC average capped at n={_MAX_RC_N}, m={_MAX_RC_M}"
        )
    paulis = pauli_basis(n)
    ident = Pauli.identity(n)
    h_inv = [h.inverse() for h in hard]
    hard_ptms = [noisy_hard(i) for i in range(m)]
    acc = np.zeros((4 ** n, 4 ** n))
    for tup in itertools.product(paulis, repeat=m):
        mat = None
        prev = ident
        for i in range(m):
            t_c = h_inv[i].conjugate(tup[i]).phaseless()
            composed = _compose_cliffords(
                [_pauli_op(prev), easy[i], _pauli_op(t_c)]
            )
            seg = hard_ptms[i] @ noisy_easy(i, composed)
            mat = seg if mat is None else seg @ mat
            prev = tup[i]
        final = _compose_cliffords([_pauli_op(prev), easy[m]])
        mat = noisy_easy(m, final) @ mat
        acc += mat
    return acc / len(paulis) ** m


def ptm_of_clifford(c: CliffordOp) -> np.ndarray:
    """Signed permutation PTM of ideal Clifford conjugation."""
    basis = pauli_basis(c.n)
    index = {(p.x, p.z): i for i, p in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)))
    for j, q in enumerate(basis):
        img = c.conjugate(q)
        out[index[(img.x, img.z)], j] = img.sign
    return out


def effective_first_cycle(
    h0: CliffordOp,
    e0: CliffordOp,
    noisy_hard: np.ndarray,
    noisy_easy: Callable[[CliffordOp], np.ndarray],
) -> np.ndarray:
    """Twirl average of the boundary cycle: <phi(T) nu(H_0) nu(T^c E_0)>."""
    paulis = pauli_basis(h0.n)
    h_inv = h0.inverse()
    acc = np.zeros((4 ** h0.n,) * 2)
    for t in paulis:
        t_c = _pauli_op(h_inv.conjugate(t).phaseless())
        composed = _compose_cliffords([e0, t_c])
        acc += pauli_ptm(t) @ noisy_hard @ noisy_easy(composed)
    return acc / len(paulis)


def effective_final_cycle(
    em: CliffordOp, noisy_easy: Callable[[CliffordOp], np.ndarray]
) -> np.ndarray:
    """Twirl average of the last slot: <nu(E_m T) phi(T)†>."""
    paulis = pauli_basis(em.n)
    acc = np.zeros((4 ** em.n,) * 2)
    for t in paulis:
        composed = _compose_cliffords([_pauli_op(t), em])
        acc += noisy_easy(composed) @ pauli_ptm(t)
    return acc / len(paulis)


def process_fidelity(m: np.ndarray) -> float:
    """tr(M) / 4^n; equals mu(I) for Pauli stochastic channels."""
    return float(np.trace(m)) / m.shape[0]


def state_prep_vector(n: int) -> np.ndarray:
    """|0^n> in the normalized Pauli basis: entries <P>_0 = [P is Z-type]."""
    basis = pauli_basis(n)
    return np.array([1.0 if p.x == 0 else 0.0 for p in basis])


def measurement_vector(z_mask: int, n: int) -> np.ndarray:
    """Row vector of the observable Z^mask in the normalized Pauli basis."""
    basis = pauli_basis(n)
    return np.array(
        [1.0 if (p.x == 0 and p.z == z_mask) else 0.0 for p in basis]
    )
