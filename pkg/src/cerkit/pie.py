"""Orbit-fidelity estimation from exponential decays of compiled circuits.

A query Pauli P is prepared as an eigenstate pattern by a boundary easy cycle,
the hard cycle is repeated m times under randomized compiling, and a parity
counting rule turns each shot into +/-1.  The average N_{P,m} decays as
A f^m where f is the (geometric) average fidelity over the orbit of P under
the hard cycle and A absorbs all state-preparation and measurement error,
which is what makes the two-point ratio estimator SPAM robust.

The orbit-resolving variant adds a third batch keyed to the conjugated query
and forms a ratio in which everything but the single-Pauli fidelity cancels,
valid when preparation errors vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuits import CbCircuit, Cycle
from .clifford import CliffordOp, OrbitSet, orbit, pauli_order
from .pauli import Pauli, QubitSet
from .sim import InstanceResult, NoiseModel, run_batch

__all__ = [
    "PieSettings",
    "PieQuery",
    "DecayRecord",
    "PieResult",
    "choose_boundary_cycles",
    "counting_value",
    "basis_grouping",
    "BasisGroup",
    "pie_counts",
    "estimate_orbit_fidelity",
    "pie_oracle",
    "resolve_orbit",
]

# Single-qubit basis changes: prep maps Z to the letter, meas maps the letter
# back to Z.
_PREP_GATE = {"X": "H", "Y": "SH", "Z": "I"}
_MEAS_GATE = {"X": "H", "Y": "HSdg", "Z": "I"}


@dataclass(frozen=True)
class PieSettings:
    m1: int = 4
    m2: int = 32
    shots: int = 512
    randomizations: int = 30
    bootstrap: int = 200
    threads: int = 1

    def __post_init__(self):
        if not 1 <= self.m1 < self.m2:
            raise ValueError("need 1 <= m1 < m2")
        if min(self.shots, self.randomizations, self.bootstrap) < 1:
            raise ValueError("shots, randomizations, bootstrap must be positive")


@dataclass(frozen=True)
class PieQuery:
    pauli: Pauli
    hard_cycle: str = ""

    def __post_init__(self):
        if self.pauli.weight == 0:
            raise ValueError("identity query needs no circuits; f(I) = 1")


@dataclass(frozen=True)
class DecayRecord:
    query: Pauli
    m: int
    n_value: float
    per_randomization: tuple[float, ...]
    shots: int

    def __post_init__(self):
        if abs(self.n_value) > 1.0 + 1e-12:
            raise ValueError("averaged count outside [-1, 1]")


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    sigma: float
    status: str = "ok"  # ok | rejected | refused


@dataclass(frozen=True)
class PieResult:
    orbit_fidelities: dict
    query_estimates: dict
    records: tuple[DecayRecord, ...]
    failures: tuple[str, ...] = ()


@dataclass(frozen=True)
class BasisGroup:
    """One measurement strategy: a letter in {X,Y,Z} per covered qubit."""

    letters: tuple[tuple[int, str], ...]  # sorted (qubit, letter)
    members: tuple[Pauli, ...]

    def letter_map(self) -> dict[int, str]:
        return dict(self.letters)

    def signature(self) -> tuple:
        return self.letters


def _boundary_cycle(letters: Mapping[int, str], n: int, table: Mapping[str, str]) -> Cycle:
    gates = tuple(
        (table[letters[q]] if q in letters else "I", (q,)) for q in range(n)
    )
    return Cycle("easy", gates, n)


def choose_boundary_cycles(p: Pauli, h: CliffordOp, m: int) -> tuple[Cycle, Cycle, Pauli]:
    """Boundary easy cycles for one query: E0[Z^s(A)] = P, Em[Q] = Z^s(B)."""
    if p.weight == 0:
        raise ValueError("identity query needs no boundary cycles")
    q = _conj_power(h, p, m)
    e0 = _boundary_cycle({i: p.letter(i) for i in p.support}, p.n, _PREP_GATE)
    em = _boundary_cycle({i: q.letter(i) for i in q.support}, p.n, _MEAS_GATE)
    return e0, em, q


def counting_value(outcome_bits: int, frame_x: int, b_mask: int) -> int:
    """+1 if X^(x+s) commutes with Z^s(B), else -1."""
    return 1 - 2 * (bin((outcome_bits ^ frame_x) & b_mask).count("1") & 1)


def basis_grouping(queries: Sequence[Pauli]) -> list[BasisGroup]:
    """Greedy cover of queries by per-qubit letter assignments.

    A query joins a group iff each of its letters matches the group letter
    on that qubit (or the group has no letter there yet).  Heavier queries
    are placed first so they seed the groups lighter ones can join.
    """
    ordered = sorted(
        {(p.x, p.z): p.phaseless() for p in queries if p.weight > 0}.values(),
        key=lambda p: (-p.weight, p.key()),
    )
    groups: list[tuple[dict[int, str], list[Pauli]]] = []
    for p in ordered:
        letters = {q: p.letter(q) for q in p.support}
        placed = False
        for glet, members in groups:
            if all(glet.get(q, letters[q]) == letters[q] for q in letters):
                glet.update(letters)
                members.append(p)
                placed = True
                break
        if not placed:
            groups.append((letters, [p]))
    out = [
        BasisGroup(
            tuple(sorted(glet.items())),
            tuple(sorted(members, key=Pauli.key)),
        )
        for glet, members in groups
    ]
    out.sort(key=BasisGroup.signature)
    return out


def _observable_sign(base: CbCircuit, a_mask: int, b_mask: int) -> int:
    """Sign relating the measured Z^s(B) to the prepared Z^s(A) stabilizer."""
    n = base.n
    w = base.ideal().inverse().conjugate(Pauli.hermitian(n, 0, b_mask))
    if (w.x, w.z) != (0, a_mask):
        raise AssertionError(
            "pulled-back observable is not the prepared stabilizer; "
            "boundary cycles are inconsistent with m"
        )
    return w.sign


@dataclass(frozen=True)
class GroupRun:
    """Decay records of every query of one basis group at one m."""

    group: BasisGroup
    m: int
    records: tuple[DecayRecord, ...]


def _run_group(
    group_letters: Mapping[int, str],
    members: Sequence[Pauli],
    hard: Cycle,
    h: CliffordOp,
    m: int,
    settings: PieSettings,
    model: NoiseModel,
    seed: int,
    stream: int,
) -> list[DecayRecord]:
    n = hard.n
    e0 = _boundary_cycle(group_letters, n, _PREP_GATE)
    # Member images under H^m share the group letters whenever m is a
    # multiple of the tableau period, which callers enforce for grouped runs.
    images = {(p.x, p.z): _conj_power(h, p, m) for p in members}
    meas_letters: dict[int, str] = {}
    for img in images.values():
        for qb in img.support:
            letter = img.letter(qb)
            if meas_letters.setdefault(qb, letter) != letter:
                raise ValueError("conflicting measurement letters within a group")
    em = _boundary_cycle(meas_letters, n, _MEAS_GATE)
    base = CbCircuit(e0, hard, em, m)
    signs = {}
    for p in members:
        img = images[(p.x, p.z)]
        signs[(p.x, p.z)] = _observable_sign(base, p.support.mask(), img.support.mask())
    results = run_batch(
        base,
        model,
        settings.randomizations,
        settings.shots,
        seed,
        stream=stream,
        cycle_id=hard.label,
        threads=settings.threads,
    )
    records = []
    for p in members:
        img = images[(p.x, p.z)]
        b_mask = img.support.mask()
        sigma = signs[(p.x, p.z)]
        per_rand = []
        for res in results:
            fx = res.instance.frame.x
            acc = 0
            for s, c in res.counts.items():
                acc += c * counting_value(s, fx, b_mask)
            per_rand.append(sigma * acc / settings.shots)
        records.append(
            DecayRecord(p, m, float(np.mean(per_rand)), tuple(per_rand), settings.shots)
        )
    return records


def _conj_power(h: CliffordOp, p: Pauli, m: int) -> Pauli:
    q = p.phaseless()
    for _ in range(m % pauli_order(h)):
        q = h.conjugate(q).phaseless()
    return q


def pie_counts(
    query: PieQuery,
    m: int,
    settings: PieSettings,
    hard: Cycle,
    model: NoiseModel,
    seed: int,
    stream: int = 0,
) -> DecayRecord:
    """Decay record of a single query at one sequence length."""
    h = hard.clifford()
    p = query.pauli.phaseless()
    letters = {q: p.letter(q) for q in p.support}
    (rec,) = _run_group(letters, [p], hard, h, m, settings, model, seed, stream)
    return rec


def _noise_floor(settings: PieSettings) -> float:
    return 5.0 / math.sqrt(settings.randomizations * settings.shots)


def estimate_orbit_fidelity(
    rec1: DecayRecord,
    rec2: DecayRecord,
    settings: PieSettings,
    seed: int,
) -> FidelityEstimate:
    """Two-point ratio estimator with bootstrap over randomizations."""
    if rec2.m <= rec1.m:
        raise ValueError("second record must be at the longer sequence length")
    floor = _noise_floor(settings)
    if abs(rec1.n_value) < floor:
        return FidelityEstimate(
            float("nan"), float("nan"), "rejected: N(m1) within noise floor"
        )
    ratio = rec2.n_value / rec1.n_value
    if ratio <= 0:
        return FidelityEstimate(
            float("nan"), float("nan"), "rejected: non-positive decay ratio"
        )
    gap = rec2.m - rec1.m
    value = ratio ** (1.0 / gap)
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(0xB007,)))
    )
    a1 = np.array(rec1.per_randomization)
    a2 = np.array(rec2.per_randomization)
    samples = []
    for _ in range(settings.bootstrap):
        m1 = a1[rng.integers(0, len(a1), len(a1))].mean()
        m2 = a2[rng.integers(0, len(a2), len(a2))].mean()
        if abs(m1) < 1e-15 or m2 / m1 <= 0:
            continue
        samples.append((m2 / m1) ** (1.0 / gap))
    sigma = float(np.std(samples)) if len(samples) >= 2 else float("nan")
    return FidelityEstimate(float(value), sigma, "ok")


def pie_oracle(
    queries: Iterable[Pauli],
    hard: Cycle,
    settings: PieSettings,
    model: NoiseModel,
    seed: int,
) -> PieResult:
    """Estimate one orbital fidelity per distinct orbit touched by S."""
    h = hard.clifford()
    period = pauli_order(h)
    for m in (settings.m1, settings.m2):
        if m % period:
            raise ValueError(
                f"sequence length {m} must be a multiple of the cycle's "
                f"tableau period {period} for grouped queries"
            )
    qlist = [p.phaseless() for p in queries]
    identity_queried = any(p.weight == 0 for p in qlist)
    groups = basis_grouping(qlist)
    records: list[DecayRecord] = []
    failures: list[str] = []
    query_estimates: dict[Pauli, FidelityEstimate] = {}
    by_query: dict[tuple[int, int], dict[int, DecayRecord]] = {}
    for gi, group in enumerate(groups):
        for mi, m in enumerate((settings.m1, settings.m2)):
            recs = _run_group(
                group.letter_map(),
                group.members,
                hard,
                h,
                m,
                settings,
                model,
                seed,
                stream=2 * gi + mi,
            )
            records.extend(recs)
            for rec in recs:
                by_query.setdefault((rec.query.x, rec.query.z), {})[m] = rec
    for key, pair in sorted(by_query.items()):
        est = estimate_orbit_fidelity(
            pair[settings.m1], pair[settings.m2], settings, seed
        )
        query = pair[settings.m1].query
        query_estimates[query] = est
        if est.status != "ok":
            failures.append(f"{query.label()}: {est.status}")
    orbit_fidelities: dict[OrbitSet, FidelityEstimate] = {}
    by_orbit: dict[OrbitSet, list[FidelityEstimate]] = {}
    for query, est in query_estimates.items():
        by_orbit.setdefault(orbit(query, h), []).append(est)
    for o, ests in sorted(by_orbit.items(), key=lambda kv: kv[0].key()):
        good = [e for e in ests if e.status == "ok"]
        if not good:
            orbit_fidelities[o] = FidelityEstimate(
                float("nan"), float("nan"), "rejected: no valid member estimate"
            )
            continue
        value = sum(e.value for e in good) / len(good)
        sigma = math.sqrt(sum(e.sigma ** 2 for e in good)) / len(good)
        orbit_fidelities[o] = FidelityEstimate(value, sigma, "ok")
    if identity_queried:
        n = hard.n
        ident_orbit = orbit(Pauli.identity(n), h)
        orbit_fidelities[ident_orbit] = FidelityEstimate(1.0, 0.0, "ok")
    return PieResult(
        orbit_fidelities, query_estimates, tuple(records), tuple(failures)
    )


def resolve_orbit(
    query: PieQuery,
    hard: Cycle,
    settings: PieSettings,
    model: NoiseModel,
    seed: int,
) -> tuple[FidelityEstimate, dict]:
    """Single-Pauli fidelity via the three-batch orbit-resolving estimator.

    Sequence lengths satisfy m1, m2 = 1 and m3 = 0 modulo the orbit size (and
    differ by multiples of the tableau period so boundary cycles line up).
    The ratio  A-hat p-hat^(m3+1) / N_{Q,m3}  cancels measurement error and
    the orbital decay, leaving f(P); preparation error does not cancel, so
    any nonzero preparation flip rate refuses the call.
    """
    if any(r > 0 for r in model.prep_flip):
        return (
            FidelityEstimate(
                float("nan"), float("nan"), "refused: preparation error must vanish"
            ),
            {},
        )
    h = hard.clifford()
    p = query.pauli.phaseless()
    o = orbit(p, h)
    k = len(o)
    period = pauli_order(h)
    step = math.lcm(k, period)
    m1 = settings.m1 + ((1 - settings.m1) % k)
    while m1 < 1:
        m1 += k
    m2 = m1 + max(1, math.ceil((settings.m2 - m1) / step)) * step
    m3 = settings.m2 + ((-settings.m2) % step)
    q_img = _conj_power(h, p, 1)
    letters_p = {i: p.letter(i) for i in p.support}
    letters_q = {i: q_img.letter(i) for i in q_img.support}
    rec1 = _run_group(letters_p, [p], hard, h, m1, settings, model, seed, stream=100)[0]
    rec2 = _run_group(letters_p, [p], hard, h, m2, settings, model, seed, stream=101)[0]
    rec3 = _run_group(letters_q, [q_img], hard, h, m3, settings, model, seed, stream=102)[0]
    meta = {
        "m1": m1,
        "m2": m2,
        "m3": m3,
        "orbit": o.label(),
        "precision_note": "single-Pauli estimates carry additive shot-noise error",
    }
    floor = _noise_floor(settings)
    if abs(rec1.n_value) < floor or abs(rec3.n_value) < floor:
        return (
            FidelityEstimate(float("nan"), float("nan"), "rejected: signal in noise floor"),
            meta,
        )
    ratio = rec2.n_value / rec1.n_value
    if ratio <= 0:
        return (
            FidelityEstimate(float("nan"), float("nan"), "rejected: non-positive ratio"),
            meta,
        )
    p_hat = ratio ** (1.0 / (m2 - m1))
    a_hat = rec1.n_value / p_hat ** m1
    value = a_hat * p_hat ** (m3 + 1) / rec3.n_value
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(0xB008,)))
    )
    arrays = [np.array(r.per_randomization) for r in (rec1, rec2, rec3)]
    samples = []
    for _ in range(settings.bootstrap):
        b1, b2, b3 = (a[rng.integers(0, len(a), len(a))].mean() for a in arrays)
        if abs(b1) < 1e-15 or b2 / b1 <= 0 or abs(b3) < 1e-15:
            continue
        pb = (b2 / b1) ** (1.0 / (m2 - m1))
        samples.append((b1 / pb ** m1) * pb ** (m3 + 1) / b3)
    sigma = float(np.std(samples)) if len(samples) >= 2 else float("nan")
    return FidelityEstimate(float(value), sigma, "ok"), meta
