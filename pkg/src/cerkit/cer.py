"""Cycle error reconstruction: per-support marginal tables and heatmaps.

For each union of k parallel gate supports, the full Pauli subgroup on the
union is fed to the orbit-fidelity oracle and the character transform turns
orbit fidelities into orbit-summed marginal probabilities.  A weight-limited
inversion then stitches single- and pair-support marginals into a sparse
probability distribution over the whole register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .channel import (
    MarginalRow,
    MarginalTable,
    PauliDistribution,
    weight2_inversion,
)
from .circuits import Cycle, parallel_supports, support_unions
from .clifford import OrbitSet, orbit_partition
from .pauli import Pauli, QubitSet, chi, enumerate_subgroup
from .pie import PieSettings, pie_oracle
from .sim import NoiseModel

__all__ = [
    "CerConfig",
    "CerResult",
    "cer_run",
    "HeatmapRow",
    "HeatmapData",
    "heatmap_table",
    "reduced_model_fit",
    "orbit_row_label",
]


@dataclass(frozen=True)
class CerConfig:
    hard: Cycle
    seed: int
    k: int = 2
    settings: PieSettings = PieSettings()
    threshold: float = 0.001

    def __post_init__(self):
        s = len(parallel_supports(self.hard))
        if not 1 <= self.k <= s:
            raise ValueError(f"union order k={self.k} outside 1..{s}")


@dataclass(frozen=True)
class CerResult:
    config: CerConfig
    supports: tuple[QubitSet, ...]
    per_support: Mapping[QubitSet, MarginalTable]
    failures: tuple[str, ...] = ()

    @property
    def cycle_label(self) -> str:
        return self.config.hard.label or self.config.hard.describe()


def _support_seed(seed: int, index: int) -> int:
    # Distinct substream entropy per support so no two supports share the
    # (seed, stream) pairs handed to the simulator.
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(0xCE2, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def cer_run(config: CerConfig, model: NoiseModel) -> CerResult:
    """One marginal table per union of k parallel gate supports."""
    hard = config.hard
    h = hard.clifford()
    supports = parallel_supports(hard)
    unions = support_unions(supports, config.k)
    tables: dict[QubitSet, MarginalTable] = {}
    failures: list[str] = []
    for idx, a in enumerate(unions):
        try:
            queries = enumerate_subgroup(a, hard.n)
            res = pie_oracle(
                queries, hard, config.settings, model, _support_seed(config.seed, idx)
            )
            failures.extend(f"{a}: {msg}" for msg in res.failures)
            tables[a] = _marginal_table(a, h, res.orbit_fidelities)
        except Exception as exc:  # keep processing remaining supports
            failures.append(f"{a}: {exc}")
    return CerResult(config, tuple(unions), tables, tuple(failures))


def _marginal_table(a: QubitSet, h, orbit_fidelities) -> MarginalTable:
    """Character-transform orbit fidelities into orbit-summed marginals.

    mu(t) = (|t| / 4^|A|) sum_o c_o f(o) with c_o = sum_{Q in o} chi(Q, P_t);
    the same linear coefficients propagate the fidelity uncertainties.
    """
    fids = {}
    sigmas = {}
    for o, est in orbit_fidelities.items():
        if est.status == "ok":
            fids[o] = est.value
            sigmas[o] = est.sigma
    targets = orbit_partition(a, h)
    scale = 4 ** len(a)
    rows = []
    for t in targets:
        rep = t.representative
        mu = 0.0
        var = 0.0
        missing = False
        for o in targets:
            c = len(t) * sum(chi(q, rep) for q in o.members) / scale
            if c == 0:
                continue
            if o not in fids:
                missing = True
                break
            mu += c * fids[o]
            var += (c * sigmas[o]) ** 2
        if missing:
            rows.append(MarginalRow(t, float("nan"), float("nan"), "failed"))
            continue
        sigma = math.sqrt(var)
        status = "negative" if mu < -3 * sigma else "ok"
        rows.append(MarginalRow(t, mu, sigma, status))
    return MarginalTable(a, tuple(rows))


def orbit_row_label(o: OrbitSet, a: QubitSet) -> str:
    """Heatmap row label: member letter strings over the sorted support."""
    qubits = sorted(a.indices)
    return "{" + ", ".join(
        "".join(m.letter(q) for q in qubits) for m in o.members
    ) + "}"


@dataclass(frozen=True)
class HeatmapRow:
    support_label: str
    row_label: str
    # One cell per result column; None where the support is absent.
    cells: tuple[tuple[float, float, str] | None, ...]


@dataclass(frozen=True)
class HeatmapData:
    columns: tuple[str, ...]  # one per hard cycle
    rows: tuple[HeatmapRow, ...]
    threshold: float


def heatmap_table(
    results: Sequence[CerResult], threshold: float | None = None
) -> HeatmapData:
    """Grid assembly: columns per cycle, blocks per support, rows per orbit.

    The identity orbit is displayed as process infidelity 1 - mu(I); every
    other row shows the orbit-summed marginal.  A row is dropped when every
    cell sits below the display threshold.
    """
    if not results:
        raise ValueError("need at least one reconstruction result")
    sizes = {r.config.hard.n for r in results}
    if len(sizes) != 1:
        raise ValueError("results span different register sizes")
    if threshold is None:
        threshold = results[0].config.threshold
    columns = tuple(r.cycle_label for r in results)
    # Row identity is (support, orbit label); collect across all results.
    order: list[tuple[str, str]] = []
    cells: dict[tuple[str, str], list] = {}
    for ci, res in enumerate(results):
        for a in res.supports:
            table = res.per_support.get(a)
            if table is None:
                continue
            slabel = str(a)
            for row in table.rows:
                is_identity = row.orbit.representative.weight == 0
                rlabel = "1 - mu(I)" if is_identity else orbit_row_label(row.orbit, a)
                key = (slabel, rlabel)
                if key not in cells:
                    cells[key] = [None] * len(results)
                    order.append(key)
                mu = 1.0 - row.mu if is_identity else row.mu
                cells[key][ci] = (mu, row.sigma, row.status)
    rows = []
    for key in order:
        vals = cells[key]
        shown = [c for c in vals if c is not None and not math.isnan(c[0])]
        if shown and all(abs(c[0]) < threshold for c in shown):
            continue
        rows.append(HeatmapRow(key[0], key[1], tuple(vals)))
    return HeatmapData(columns, tuple(rows), threshold)


def _expand_rows(table: MarginalTable) -> dict[Pauli, tuple[float, float]]:
    """Per-Pauli marginals from orbit rows, splitting mass evenly.

    Orbit members are indistinguishable to the reconstruction, so an even
    split is the minimum-information expansion; uncertainties split with it.
    """
    out: dict[Pauli, tuple[float, float]] = {}
    for row in table.rows:
        if math.isnan(row.mu):
            continue
        k = len(row.orbit)
        for m in row.orbit.members:
            out[m] = (row.mu / k, row.sigma / k)
    return out


def _restricted(
    expanded: Mapping[Pauli, tuple[float, float]],
    a: QubitSet,
    b: QubitSet,
) -> dict[Pauli, tuple[float, float]]:
    """Marginals on sub-support B from per-Pauli marginals on A."""
    acc: dict[Pauli, list[float]] = {}
    for p, (mu, sigma) in expanded.items():
        key = p.restrict(b)
        entry = acc.setdefault(key, [0.0, 0.0])
        entry[0] += mu
        entry[1] += sigma ** 2
    return {p: (mu, math.sqrt(var)) for p, (mu, var) in acc.items()}


def reduced_model_fit(result: CerResult) -> tuple[PauliDistribution, dict]:
    """Weight-limited register-wide distribution from the marginal tables.

    Single- and pair-qubit marginals are extracted from each support table
    (inverse-variance averaged when several tables cover the same key) and
    handed to the weight-2 inversion; its report flags marginals that imply
    negative probabilities, the signature of heavier errors.
    """
    if result.config.k not in (1, 2):
        raise ValueError("reduced model fit needs union order k of 1 or 2")
    n = result.config.hard.n
    singles_acc: dict[tuple[int, Pauli], list[tuple[float, float]]] = {}
    pairs_acc: dict[tuple[int, int, Pauli], list[tuple[float, float]]] = {}
    for a, table in result.per_support.items():
        expanded = _expand_rows(table)
        if not expanded:
            continue
        qubits = sorted(a.indices)
        for i in qubits:
            sub = _restricted(expanded, a, QubitSet({i}))
            for p, ms in sub.items():
                if p.weight == 1:
                    singles_acc.setdefault((i, p), []).append(ms)
        for ii, i in enumerate(qubits):
            for j in qubits[ii + 1 :]:
                sub = _restricted(expanded, a, QubitSet({i, j}))
                for p, ms in sub.items():
                    if p.weight == 2:
                        pairs_acc.setdefault((i, j, p), []).append(ms)

    def combine(values: list[tuple[float, float]]) -> tuple[float, float]:
        if len(values) == 1:
            return values[0]
        weights = [1.0 / max(s, 1e-12) ** 2 for _, s in values]
        total = sum(weights)
        mu = sum(w * m for w, (m, _) in zip(weights, values)) / total
        return mu, math.sqrt(1.0 / total)

    singles = {k: combine(v) for k, v in singles_acc.items()}
    pairs = {k: combine(v) for k, v in pairs_acc.items()}
    return weight2_inversion(singles, pairs, n)
