"""User-invocable equivalence suite between the fast paths and the dense oracle.

Three families of checks, one per structural claim the protocols rest on:
the character transform between fidelities and orbit marginals, the
stochasticity of twirl-averaged dressed cycles, and the factorization of the
averaged compiled circuit into effective cycles (exact for gate-independent
easy noise, second order in the gate dependence otherwise).
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .channel import (
    PauliDistribution,
    fidelity_from_dist,
    marginal,
    orbit_marginal_from_orbit_fidelities,
)
from .clifford import CliffordOp, clifford_from_cycle, orbit_partition
from .pauli import Pauli, QubitSet, enumerate_subgroup
from . import oracle as orc

__all__ = [
    "check_marginal_transform",
    "check_dressed_stochasticity",
    "check_rc_factorization",
    "run_all",
]

_ONE_QUBIT_GATES = ("I", "X", "Y", "Z", "H", "S", "Sdg", "SH", "HSdg")
_TWO_QUBIT_GATES = ("CX", "CZ", "SWAP")


def _named_cycles() -> list[tuple[str, CliffordOp, QubitSet]]:
    out = []
    for g in _ONE_QUBIT_GATES:
        out.append((g, clifford_from_cycle([(g, (0,))], 1), QubitSet({0})))
    for g in _TWO_QUBIT_GATES:
        out.append((g, clifford_from_cycle([(g, (0, 1))], 2), QubitSet({0, 1})))
    return out


def _random_dist(n: int, rng: np.random.Generator) -> PauliDistribution:
    paulis = enumerate_subgroup(QubitSet(range(n)), n)
    raw = rng.random(len(paulis)) ** 3
    raw[0] += 10.0  # keep the channel identity-dominated
    raw /= raw.sum()
    return PauliDistribution(n, dict(zip(paulis, (float(v) for v in raw))))


def check_marginal_transform(dists_per_gate: int = 1000, seed: int = 7) -> tuple[bool, str]:
    """Orbit-summed marginals from fidelities match direct summation.

    For each named hard gate and many random distributions, transform exact
    orbit-average fidelities into orbit marginals and compare with marginals
    computed straight from the distribution.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, h, a in _named_cycles():
        n = h.n
        targets = orbit_partition(a, h)
        for _ in range(dists_per_gate):
            dist = _random_dist(n, rng)
            orbit_fids = {
                o: sum(fidelity_from_dist(dist, q) for q in o.members) / len(o)
                for o in targets
            }
            for t in targets:
                via_fids = orbit_marginal_from_orbit_fidelities(orbit_fids, t, a)
                direct = sum(marginal(dist, m, a) for m in t.members)
                worst = max(worst, abs(via_fids - direct))
    ok = worst < 1e-12
    return ok, f"max |transform - direct| = {worst:.2e} (tolerance 1e-12)"


def _per_gate_channel(n: int, seed: int) -> Callable[[CliffordOp], np.ndarray]:
    """A CPTP error PTM keyed to the signed tableau of each gate.

    The key includes the Pauli dressing: twirled variants of an easy cycle
    are physically distinct gates, and a phaseless key would alias them.
    """
    cache: dict = {}

    def channel(c: CliffordOp) -> np.ndarray:
        key = tuple((p.x, p.z, p.sign) for p in (*c.x_images, *c.z_images))
        if key not in cache:
            gate_rng = np.random.default_rng((seed, hash(key) & 0xFFFFFFFF))
            cache[key] = orc.random_cptp_ptm(c.n, gate_rng, strength=0.15)
        return cache[key]

    return channel


def _gate_dependent_noise(
    n: int, epsilon: float, seed: int, shared=None
) -> Callable[[CliffordOp], np.ndarray]:
    """Noisy implementation map nu(C) = [(1-eps) N0 + eps N_C] phi(C).

    The error composes after the ideal gate; at eps = 0 this is the fixed
    easy-cycle error class for which the compiled-circuit average factorizes
    exactly, and eps is exactly the gate-dependence scale.
    """
    if shared is None:
        shared = orc.random_cptp_ptm(n, np.random.default_rng(seed), strength=0.15)
    per_gate = _per_gate_channel(n, seed)
    cache: dict = {}

    def noisy(c: CliffordOp) -> np.ndarray:
        key = tuple((p.x, p.z, p.sign) for p in (*c.x_images, *c.z_images))
        if key not in cache:
            err = shared if epsilon == 0.0 else (
                (1 - epsilon) * shared + epsilon * per_gate(c)
            )
            cache[key] = err @ orc.ptm_of_clifford(c)
        return cache[key]

    return noisy


def check_dressed_stochasticity(
    trials: int = 6, seed: int = 11
) -> tuple[bool, str]:
    """Twirl-averaged dressed cycles are ideal Clifford times diagonal noise."""
    worst = 0.0
    for name, h, a in _named_cycles():
        n = h.n
        e = clifford_from_cycle([("I", (q,)) for q in range(n)], n)
        for t in range(trials):
            noisy = _gate_dependent_noise(n, epsilon=0.7, seed=1000 * t + seed)
            noisy_hard = noisy(h)
            eff = orc.effective_dressed_cycle(h, e, noisy_hard, noisy)
            # Undo the ideal action; a signed permutation inverts by transpose.
            residual = orc.ptm_of_clifford(h @ e).T @ eff
            off = residual - np.diag(np.diag(residual))
            worst = max(worst, float(np.max(np.abs(off))))
    ok = worst < 1e-12
    return ok, f"max off-diagonal after undoing the ideal cycle = {worst:.2e}"


def _stochastic_hard(h: CliffordOp, rng: np.random.Generator) -> np.ndarray:
    """A noisy hard cycle whose error is already Pauli stochastic."""
    from .pauli import QubitSet as _QS

    dist = _random_dist(h.n, rng)
    basis = orc.pauli_basis(h.n)
    diag = np.diag([fidelity_from_dist(dist, q) for q in basis])
    return orc.ptm_of_clifford(h) @ diag


def _rc_error(
    h: CliffordOp, m: int, epsilon: float, seed: int, stochastic_base: bool
) -> float:
    """Frobenius gap between the averaged compiled circuit and the product
    of independently averaged effective cycles.

    With ``stochastic_base`` the shared noise is a Pauli channel on the hard
    cycle and the easy cycles are perfect up to the epsilon perturbation;
    every twirl-dependent deviation is then itself of order epsilon and the
    factorization gap is quadratic.  With a generic shared CPTP easy error
    the deviations stay finite as epsilon shrinks, so only the exact
    epsilon = 0 statement survives.
    """
    n = h.n
    ident = clifford_from_cycle([("I", (q,)) for q in range(n)], n)
    easy = [ident] * (m + 1)
    hard = [h] * m
    if stochastic_base:
        # Shared easy error = identity, hard error Pauli stochastic: every
        # twirl-dependent deviation is then O(eps).
        noisy_easy = _gate_dependent_noise(
            n, epsilon, seed, shared=np.eye(4 ** n)
        )
        noisy_hard = _stochastic_hard(h, np.random.default_rng(seed))
    else:
        noisy_easy = _gate_dependent_noise(n, epsilon, seed)
        noisy_hard = noisy_easy(h)
    avg = orc.average_rc_circuit(
        easy, hard, lambda i, op: noisy_easy(op), lambda i: noisy_hard
    )
    prod = orc.effective_first_cycle(h, easy[0], noisy_hard, noisy_easy)
    for i in range(1, m):
        prod = orc.effective_dressed_cycle(h, easy[i], noisy_hard, noisy_easy) @ prod
    prod = orc.effective_final_cycle(easy[m], noisy_easy) @ prod
    return float(np.linalg.norm(avg - prod))


def check_rc_factorization(
    epsilons: tuple[float, ...] = (1e-1, 1e-2, 1e-3),
    n: int = 1,
    m: int = 2,
    trials: int = 3,
    seed: int = 5,
) -> tuple[bool, str]:
    """Exact factorization at eps = 0; second-order error otherwise."""
    h = (
        clifford_from_cycle([("H", (0,))], 1)
        if n == 1
        else clifford_from_cycle([("CX", (0, 1))], 2)
    )
    exact = max(
        _rc_error(h, m, 0.0, seed + t, stochastic_base=False) for t in range(trials)
    )
    if exact >= 1e-12:
        return False, f"gate-independent gap {exact:.2e} exceeds 1e-12"
    slopes = []
    for t in range(trials):
        errs = [
            _rc_error(h, m, eps, seed + t, stochastic_base=True) for eps in epsilons
        ]
        slope = np.polyfit(np.log(epsilons), np.log(errs), 1)[0]
        slopes.append(float(slope))
    mean_slope = float(np.mean(slopes))
    ok = abs(mean_slope - 2.0) <= 0.2
    return ok, (
        f"gate-independent gap {exact:.2e}; "
        f"log-log slope {mean_slope:.3f} (target 2.0 +- 0.2)"
    )


def run_all(fast: bool = True) -> list[tuple[str, bool, str]]:
    """The suite behind `cerkit oracle check`; fast mode stays under a minute."""
    dists = 100 if fast else 1000
    trials = 2 if fast else 6
    rc_trials = 1 if fast else 3
    results = []
    ok, detail = check_marginal_transform(dists_per_gate=dists)
    results.append(("marginal transform vs direct summation", ok, detail))
    ok, detail = check_dressed_stochasticity(trials=trials)
    results.append(("dressed-cycle stochasticity", ok, detail))
    ok, detail = check_rc_factorization(trials=rc_trials)
    results.append(("compiled-circuit factorization", ok, detail))
    return results
