"""Pauli stochastic channels and conversions between their descriptions.

A Pauli stochastic channel rho -> sum_P p(P) P rho P† is fully described by
the probability distribution p.  Equivalent descriptions used throughout:

  fidelities   f(Q) = sum_R chi(Q, R) p(R) = 1 - 2 * (anticommuting mass)
  marginals    mu(P_A) = sum over errors whose restriction to A equals P_A
  orbit rows   mu(orbit) = sum of member marginals, recoverable from
               orbit-averaged fidelities alone when the subgroup on A is
               invariant under the hard cycle.

All keys are phaseless Paulis.  Conversions are exact character sums; no
sampling happens in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .clifford import CliffordOp, OrbitSet, orbit_partition
from .pauli import Pauli, QubitSet, chi, enumerate_subgroup, multiply

__all__ = [
    "PauliDistribution",
    "FidelityTable",
    "MarginalTable",
    "MarginalRow",
    "CoherentTerm",
    "fidelity_from_dist",
    "dist_from_fidelities",
    "marginal",
    "marginal_from_fidelities",
    "orbit_marginal_from_orbit_fidelities",
    "orbit_average",
    "weight2_inversion",
    "pauli_twirl_rotation",
    "compose",
]

_NORM_TOL = 1e-12


def _pkey(p: Pauli) -> tuple[int, int]:
    return (p.x, p.z)


@dataclass(frozen=True)
class PauliDistribution:
    """Sparse probability map over phaseless Paulis; absent keys are zero."""

    n: int
    entries: Mapping[Pauli, float]

    def __post_init__(self):
        clean: dict[Pauli, float] = {}
        for p, prob in self.entries.items():
            if p.n != self.n:
                raise ValueError("entry qubit count differs from distribution n")
            if prob < -_NORM_TOL or prob > 1 + _NORM_TOL:
                raise ValueError(f"probability {prob} outside [0, 1]")
            if prob != 0.0:
                clean[p.phaseless()] = clean.get(p.phaseless(), 0.0) + prob
        total = sum(clean.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "entries", clean)

    @classmethod
    def identity(cls, n: int) -> "PauliDistribution":
        return cls(n, {Pauli.identity(n): 1.0})

    def prob(self, p: Pauli) -> float:
        return self.entries.get(p.phaseless(), 0.0)

    def items(self):
        return sorted(self.entries.items(), key=lambda kv: kv[0].key())

    def fidelity(self, q: Pauli) -> float:
        return fidelity_from_dist(self, q)


@dataclass(frozen=True)
class FidelityTable:
    """Map phaseless Pauli -> fidelity in [-1, 1]; f(I) = 1 implicitly."""

    n: int
    entries: Mapping[Pauli, float]

    def __post_init__(self):
        clean: dict[Pauli, float] = {}
        for p, f in self.entries.items():
            if p.n != self.n:
                raise ValueError("entry qubit count differs from table n")
            if abs(f) > 1 + 1e-9:
                raise ValueError(f"fidelity {f} outside [-1, 1]")
            clean[p.phaseless()] = f
        ident = Pauli.identity(self.n)
        existing = clean.get(ident)
        if existing is not None and abs(existing - 1.0) > 1e-9:
            raise ValueError("identity fidelity must be 1")
        clean[ident] = 1.0
        object.__setattr__(self, "entries", clean)

    def value(self, p: Pauli) -> float:
        key = p.phaseless()
        if key not in self.entries:
            raise KeyError(f"no fidelity entry for {p.label()}")
        return self.entries[key]

    def items(self):
        return sorted(self.entries.items(), key=lambda kv: kv[0].key())


@dataclass(frozen=True)
class MarginalRow:
    orbit: OrbitSet
    mu: float
    sigma: float
    status: str = "ok"  # ok | negative | failed


@dataclass(frozen=True)
class MarginalTable:
    """Per-support orbit marginal estimates mu-hat with uncertainties."""

    support: QubitSet
    rows: tuple[MarginalRow, ...]

    def row_for(self, p: Pauli) -> MarginalRow:
        for row in self.rows:
            if p in row.orbit:
                return row
        raise KeyError(f"no orbit row containing {p.label()}")

    def total(self) -> float:
        return sum(r.mu for r in self.rows)


@dataclass(frozen=True)
class CoherentTerm:
    """A single-qubit rotation exp(-i (angle/2) * axis) on one qubit."""

    qubit: int
    axis: str
    angle: float  # radians

    def __post_init__(self):
        if self.axis not in ("X", "Y", "Z"):
            raise ValueError(f"axis must be X, Y, or Z, got {self.axis!r}")
        if not -math.pi < self.angle <= math.pi + 1e-12:
            # Angles are folded rather than rejected; sweeps stay convenient.
            folded = (self.angle + math.pi) % (2 * math.pi) - math.pi
            object.__setattr__(self, "angle", folded)


def fidelity_from_dist(p: PauliDistribution, q: Pauli) -> float:
    """f(Q) = sum_R chi(Q, R) p(R)."""
    if q.n != p.n:
        raise ValueError("qubit-count mismatch")
    return sum(chi(q, r) * prob for r, prob in p.entries.items())


def dist_from_fidelities(f: FidelityTable) -> PauliDistribution:
    """Inverse character transform p(P) = 4^-n sum_Q chi_Q(P) f(Q); n <= 3."""
    if f.n > 3:
        raise ValueError("dense inverse transform capped at 3 qubits")
    full = enumerate_subgroup(QubitSet(range(f.n)), f.n)
    missing = [q.label() for q in full if q.phaseless() not in f.entries]
    if missing:
        raise ValueError(f"incomplete fidelity table; missing {missing[:4]}")
    d2 = 4 ** f.n
    entries: dict[Pauli, float] = {}
    for p in full:
        val = sum(chi(q, p) * f.value(q) for q in full) / d2
        if abs(val) > _NORM_TOL:
            entries[p] = val
    negatives = {p.label(): v for p, v in entries.items() if v < -1e-9}
    if negatives:
        raise ValueError(
            f"fidelity table is not a valid channel; negative masses {negatives}"
        )
    return PauliDistribution(f.n, entries)


def fidelities_on_support(p: PauliDistribution, a: QubitSet) -> FidelityTable:
    """Exact fidelity table of a distribution restricted to queries in P_A."""
    return FidelityTable(
        p.n, {q: fidelity_from_dist(p, q) for q in enumerate_subgroup(a, p.n)}
    )


def marginal(p: PauliDistribution, p_a: Pauli, a: QubitSet) -> float:
    """mu(P_A): total probability of errors whose A-restriction is P_A."""
    if p_a.support - a:
        raise ValueError(f"{p_a.label()} is not supported inside {a}")
    target = p_a.restrict(a)
    return sum(
        prob
        for r, prob in p.entries.items()
        if _pkey(r.restrict(a)) == _pkey(target)
    )


def marginal_from_fidelities(f: FidelityTable, p_a: Pauli, a: QubitSet) -> float:
    """mu(P_A) = 4^-|A| sum_{Q_A} chi(Q_A, P_A) f(Q_A)."""
    if p_a.support - a:
        raise ValueError(f"{p_a.label()} is not supported inside {a}")
    subgroup = enumerate_subgroup(a, f.n)
    return sum(chi(q, p_a) * f.value(q) for q in subgroup) / 4 ** len(a)


def orbit_marginal_from_orbit_fidelities(
    orbit_fids: Mapping[OrbitSet, float],
    target: OrbitSet,
    a: QubitSet,
) -> float:
    """mu(orbit) = (|orbit| / 4^|A|) sum_{Q_A} chi_{Q_A}(P_A) f(orbit(Q_A)).

    Replacing each member fidelity by its orbit average leaves the orbit-summed
    marginal invariant, because the character sum is constant along orbits.
    """
    lookup: dict[tuple[int, int], float] = {}
    covered: set[tuple[int, int]] = set()
    for o, fid in orbit_fids.items():
        for m in o.members:
            lookup[_pkey(m)] = fid
            covered.add(_pkey(m))
    n = target.representative.n
    subgroup = enumerate_subgroup(a, n)
    missing = [q.label() for q in subgroup if _pkey(q) not in covered]
    if missing:
        raise ValueError(f"orbit fidelities do not cover P_A; missing {missing[:4]}")
    rep = target.representative
    total = sum(chi(q, rep) * lookup[_pkey(q)] for q in subgroup)
    return len(target) * total / 4 ** len(a)


def orbit_average(f: FidelityTable, o: OrbitSet, mode: str = "arithmetic") -> float:
    if mode not in ("arithmetic", "geometric"):
        raise ValueError(f"unknown averaging mode {mode!r}")
    values = [f.value(m) for m in o.members]
    if mode == "arithmetic":
        return sum(values) / len(values)
    if any(v <= 0 for v in values):
        raise ValueError("geometric average needs strictly positive fidelities")
    return math.exp(sum(math.log(v) for v in values) / len(values))


def weight2_inversion(
    singles: Mapping[tuple[int, Pauli], tuple[float, float]],
    pairs: Mapping[tuple[int, int, Pauli], tuple[float, float]],
    n: int,
    sigma_scale: float = 3.0,
) -> tuple[PauliDistribution, dict]:
    """Invert single- and pair-support marginals under a weight-<=2 model.

    ``singles[(i, P)] = (mu, sigma)`` for weight-1 Paulis P on qubit i, and
    ``pairs[(i, j, PQ)] = (mu, sigma)`` for weight-2 Paulis on i < j.  Under
    the model, p(PQ_ij) = mu(PQ_ij) and p(P_i) = mu(P_i) - sum_k mu(PQ_ik).
    Reconstructed probabilities below -sigma_scale * sigma are reported as
    violations of the weight-<=2 assumption, not clamped.
    """
    probs: dict[Pauli, float] = {}
    sigmas: dict[Pauli, float] = {}
    violations: list[dict] = []

    for (i, j, pq), (mu, sigma) in pairs.items():
        if pq.weight != 2 or set(pq.support) != {i, j}:
            raise ValueError(f"{pq.label()} is not a weight-2 Pauli on ({i},{j})")
        probs[pq.phaseless()] = mu
        sigmas[pq.phaseless()] = sigma

    for (i, p), (mu, sigma) in singles.items():
        if p.weight != 1 or set(p.support) != {i}:
            raise ValueError(f"{p.label()} is not a weight-1 Pauli on qubit {i}")
        correction = 0.0
        var = sigma ** 2
        for (a, b, pq), (mu2, sigma2) in pairs.items():
            k = b if a == i else a if b == i else None
            if k is None:
                continue
            if _pkey(pq.restrict(QubitSet({i}))) == _pkey(p.restrict(QubitSet({i}))):
                correction += mu2
                var += sigma2 ** 2
        value = mu - correction
        key = p.phaseless()
        probs[key] = value
        sigmas[key] = math.sqrt(var)

    for key in list(probs):
        if probs[key] < -sigma_scale * sigmas[key]:
            violations.append(
                {
                    "pauli": key.label(),
                    "prob": probs[key],
                    "sigma": sigmas[key],
                    "reason": "negative beyond tolerance; weight-<=2 model violated",
                }
            )

    ident = Pauli.identity(n)
    rest = sum(probs.values())
    entries = {p: max(v, 0.0) for p, v in probs.items()}
    entries[ident] = 1.0 - sum(entries.values())
    report = {
        "violations": violations,
        "raw": {p.label(): v for p, v in sorted(probs.items(), key=lambda kv: kv[0].key())},
        "sigma": {p.label(): s for p, s in sorted(sigmas.items(), key=lambda kv: kv[0].key())},
        "identity_prob": 1.0 - rest,
    }
    return PauliDistribution(n, entries), report


def pauli_twirl_rotation(term: CoherentTerm, n: int) -> PauliDistribution:
    """Pauli twirl of exp(-i (theta/2) axis): {I: cos^2, axis: sin^2}."""
    if term.qubit >= n:
        raise ValueError(f"qubit {term.qubit} out of range for n={n}")
    s = math.sin(term.angle / 2.0) ** 2
    axis_p = Pauli.single(term.axis, term.qubit, n)
    entries = {Pauli.identity(n): 1.0 - s}
    if s > 0:
        entries[axis_p] = s
    return PauliDistribution(n, entries)


def compose(p: PauliDistribution, q: PauliDistribution) -> PauliDistribution:
    """Convolution over the Pauli group; fidelities multiply."""
    if p.n != q.n:
        raise ValueError("qubit-count mismatch")
    out: dict[Pauli, float] = {}
    for a, pa in p.entries.items():
        for b, pb in q.entries.items():
            r = multiply(a, b).phaseless()
            out[r] = out.get(r, 0.0) + pa * pb
    return PauliDistribution(p.n, out)
