"""Exact sampling of compiled-circuit outcomes under Pauli + SPAM noise.

Every simulated circuit is Clifford with interleaved Pauli errors, so the
outcome distribution factors exactly: a computational-basis measurement of a
stabilizer state is uniform over an affine subspace s0 + span(v_j), and each
injected Pauli error only shifts the outcome by the X part of its conjugate
through the remaining ideal circuit.  Sampling therefore reduces to XORs of
precomputed bit masks, with cost linear in shots and cycle count.

Coherent terms are analytically Pauli-twirled into the per-cycle stochastic
error before sampling; this is exact for randomized-compiled circuits, whose
effective dressed-cycle error is guaranteed stochastic.  One error is drawn
per dressed cycle and injected right before the hard cycle; boundary easy
cycles carry no default error.  SPAM is modeled as independent bit flips on
preparation (propagated through the circuit) and on readout.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .channel import CoherentTerm, PauliDistribution, compose, pauli_twirl_rotation
from .circuits import CbCircuit, CompiledInstance, randomized_compile
from .clifford import CliffordOp
from .pauli import Pauli, multiply

__all__ = ["NoiseModel", "ShotOutcome", "run_shot", "run_batch", "InstanceResult"]


@dataclass(frozen=True)
class ShotOutcome:
    """A length-n measurement record, bit i of ``bits`` = outcome of qubit i."""

    n: int
    bits: int


def _per_qubit(value, n: int, name: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        rates = (float(value),) * n
    else:
        rates = tuple(float(v) for v in value)
        if len(rates) != n:
            raise ValueError(f"{name} needs one rate per qubit")
    if any(not 0.0 <= r <= 1.0 for r in rates):
        raise ValueError(f"{name} rates must lie in [0, 1]")
    return rates


class NoiseModel:
    """Per-cycle stochastic Pauli errors, coherent rotations, and SPAM flips."""

    def __init__(
        self,
        n: int,
        per_cycle_errors: Mapping[str, PauliDistribution] | None = None,
        coherent_terms: Mapping[str, Sequence[CoherentTerm]] | None = None,
        meas_flip=0.0,
        prep_flip=0.0,
    ):
        self.n = n
        self.per_cycle_errors = dict(per_cycle_errors or {})
        self.coherent_terms = {
            k: tuple(v) for k, v in (coherent_terms or {}).items()
        }
        for dist in self.per_cycle_errors.values():
            if dist.n != n:
                raise ValueError("error distribution qubit count differs from n")
        self.meas_flip = _per_qubit(meas_flip, n, "meas_flip")
        self.prep_flip = _per_qubit(prep_flip, n, "prep_flip")
        self._effective_cache: dict[str, PauliDistribution] = {}

    def effective_error(self, cycle_id: str) -> PauliDistribution:
        """Stochastic part convolved with the twirl of all coherent terms.

        Coherent terms sharing a (qubit, axis) pair are rotations about the
        same generator, so their angles add before twirling; twirling them
        separately would wrongly discard the cross terms.
        """
        if cycle_id in self._effective_cache:
            return self._effective_cache[cycle_id]
        out = self.per_cycle_errors.get(cycle_id, PauliDistribution.identity(self.n))
        combined: dict[tuple[int, str], float] = {}
        for term in self.coherent_terms.get(cycle_id, ()):
            key = (term.qubit, term.axis)
            combined[key] = combined.get(key, 0.0) + term.angle
        for (qubit, axis), angle in sorted(combined.items()):
            out = compose(out, pauli_twirl_rotation(CoherentTerm(qubit, axis, angle), self.n))
        self._effective_cache[cycle_id] = out
        return out

    def with_extra_coherent(self, cycle_id: str, terms: Sequence[CoherentTerm]) -> "NoiseModel":
        coherent = {k: list(v) for k, v in self.coherent_terms.items()}
        coherent.setdefault(cycle_id, [])
        coherent[cycle_id] = list(coherent[cycle_id]) + list(terms)
        return NoiseModel(
            self.n, self.per_cycle_errors, coherent, self.meas_flip, self.prep_flip
        )


def _measure_all(c: CliffordOp, rand_bits: Sequence[int]) -> tuple[int, int]:
    """Measure all qubits of C|0^n> in order, drawing supplied random bits.

    Returns (outcome bits, number of random bits consumed).  The pivot
    structure is independent of the supplied bits, so the outcome is an
    affine function of them.
    """
    n = c.n
    destab = list(c.x_images)
    stab = list(c.z_images)
    out = 0
    used = 0
    for q in range(n):
        p = next((i for i in range(n) if (stab[i].x >> q) & 1), None)
        if p is not None:
            r = rand_bits[used] if used < len(rand_bits) else 0
            used += 1
            sp = stab[p]
            for i in range(n):
                if i != p and (stab[i].x >> q) & 1:
                    stab[i] = multiply(sp, stab[i])
                if i != p and (destab[i].x >> q) & 1:
                    destab[i] = multiply(sp, destab[i])
            destab[p] = sp
            stab[p] = Pauli.hermitian(n, 0, 1 << q, 1 if r == 0 else -1)
            out |= r << q
        else:
            acc = Pauli.identity(n)
            for i in range(n):
                if (destab[i].x >> q) & 1:
                    acc = multiply(acc, stab[i])
            if (acc.x, acc.z) != (0, 1 << q):
                raise AssertionError("deterministic outcome accumulator is not Z_q")
            out |= (0 if acc.sign == 1 else 1) << q
    return out, used


def affine_outcome_form(c: CliffordOp) -> tuple[int, list[int]]:
    """Outcome distribution of measuring C|0^n>: uniform over s0 + span(v)."""
    s0, k = _measure_all(c, [])
    vecs = []
    for j in range(k):
        bits = [0] * k
        bits[j] = 1
        out, _ = _measure_all(c, bits)
        vecs.append(out ^ s0)
    return s0, vecs


def outcome_probabilities(c: CliffordOp) -> dict[int, float]:
    """Exact outcome distribution; exponential in the number of free bits."""
    s0, vecs = affine_outcome_form(c)
    outcomes = {s0}
    for v in vecs:
        outcomes |= {s ^ v for s in outcomes}
    p = 1.0 / len(outcomes)
    return {s: p for s in sorted(outcomes)}


class BasePrecomp:
    """Per-base-circuit tables turning shot sampling into mask XORs.

    The compiled instance equals the Pauli frame composed with the base
    circuit, and Pauli easy slots are transparent to X-part propagation, so
    one precomputation serves every randomization of the same base.
    """

    def __init__(self, base: CbCircuit, model: NoiseModel, cycle_id: str):
        if base.n != model.n:
            raise ValueError("circuit and model qubit counts differ")
        self.base = base
        self.model = model
        self.n = base.n
        self.m = base.m
        self.s0, vecs = affine_outcome_form(base.ideal())
        self.free_vecs = np.array(vecs, dtype=np.uint64)
        err = model.effective_error(cycle_id)
        items = err.items()
        self.err_probs = np.array([prob for _, prob in items])
        self.err_probs = self.err_probs / self.err_probs.sum()
        self.err_paulis = [p for p, _ in items]
        h = base.hard.clifford()
        em = base.em.clifford()
        suffixes: list[CliffordOp] = [None] * self.m
        cur = em
        for i in range(self.m - 1, -1, -1):
            cur = cur @ h if i == self.m - 1 else suffixes[i + 1] @ h
            suffixes[i] = cur
        table = np.zeros((self.m, len(self.err_paulis)), dtype=np.uint64)
        for i in range(self.m):
            for j, p in enumerate(self.err_paulis):
                table[i, j] = suffixes[i].conjugate(p).x
        self.flip_table = table
        full = base.ideal()
        self.prep_masks = np.array(
            [full.conjugate(Pauli.single("X", q, self.n)).x for q in range(self.n)],
            dtype=np.uint64,
        )
        self.prep_rates = np.array(model.prep_flip)
        self.meas_rates = np.array(model.meas_flip)

    def sample(self, inst: CompiledInstance, rng: np.random.Generator, shots: int) -> np.ndarray:
        """Outcome bit strings for one instance, shape (shots,) uint64.

        Draw order is fixed (free bits, errors, prep flips, meas flips) so
        results depend only on the generator state, never on scheduling.
        """
        n, m = self.n, self.m
        s = np.full(shots, self.s0 ^ inst.frame.x, dtype=np.uint64)
        k = len(self.free_vecs)
        if k:
            picks = rng.integers(0, 2, size=(shots, k), dtype=np.uint64)
            s ^= np.bitwise_xor.reduce(picks * self.free_vecs[None, :], axis=1)
        if not (len(self.err_paulis) == 1 and self.err_paulis[0].weight == 0):
            draws = rng.choice(len(self.err_paulis), size=(m, shots), p=self.err_probs)
            s ^= np.bitwise_xor.reduce(
                self.flip_table[np.arange(m)[:, None], draws], axis=0
            )
        if self.prep_rates.any():
            flips = (rng.random((shots, n)) < self.prep_rates[None, :]).astype(np.uint64)
            s ^= np.bitwise_xor.reduce(flips * self.prep_masks[None, :], axis=1)
        if self.meas_rates.any():
            flips = rng.random((shots, n)) < self.meas_rates[None, :]
            weights = (1 << np.arange(n, dtype=np.uint64))
            s ^= (flips.astype(np.uint64) * weights[None, :]).sum(axis=1, dtype=np.uint64)
        return s


@dataclass(frozen=True)
class InstanceResult:
    instance: CompiledInstance
    counts: dict  # outcome bits -> occurrences

    @property
    def shots(self) -> int:
        return sum(self.counts.values())


def _instance_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.Philox(ss))


def run_shot(
    instance: CompiledInstance,
    model: NoiseModel,
    rng: np.random.Generator,
    cycle_id: str = "",
) -> ShotOutcome:
    """One exact outcome draw for an arbitrary compiled instance."""
    pre = BasePrecomp(instance.base, model, cycle_id or instance.base.hard.label)
    bits = int(pre.sample(instance, rng, 1)[0])
    return ShotOutcome(instance.n, bits)


def run_batch(
    base: CbCircuit,
    model: NoiseModel,
    randomizations: int,
    shots: int,
    seed: int,
    stream: int = 0,
    cycle_id: str = "",
    threads: int = 1,
) -> list[InstanceResult]:
    """Compile and sample ``randomizations`` fresh instances of one base.

    Each instance draws from its own counter-based substream keyed by
    (seed, stream, index), so the result list is identical for any thread
    count and any execution order.
    """
    if randomizations < 1 or shots < 1:
        raise ValueError("randomizations and shots must be positive")
    pre = BasePrecomp(base, model, cycle_id or base.hard.label)

    def one(index: int) -> InstanceResult:
        rng = _instance_rng(seed, stream, index)
        inst = randomized_compile(base, rng)
        outcomes = pre.sample(inst, rng, shots)
        values, freq = np.unique(outcomes, return_counts=True)
        counts = {int(v): int(c) for v, c in zip(values, freq)}
        return InstanceResult(inst, counts)

    if threads <= 1:
        return [one(i) for i in range(randomizations)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(randomizations)))
