"""Stochastic calibration: objective sweeps, quadratic fits, compensation.

The objective for a query set S is the sum of orbital fidelities of its
members; coherent errors that anticommute with an orbit member depress it,
so sweeping a compensation angle traces out a concave parabola whose vertex
cancels the coherent part.  Stochastic noise only lowers the whole curve and
is untouched by the calibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .channel import CoherentTerm
from .circuits import Cycle
from .clifford import CliffordOp, orbit
from .pauli import Pauli, QubitSet, chi, enumerate_subgroup
from .pie import PieSettings, pie_oracle
from .sim import NoiseModel
from .cer import CerConfig, CerResult, cer_run

__all__ = [
    "ScAxis",
    "ScConfig",
    "AxisFit",
    "ScSweep",
    "ScCalibration",
    "objective_estimate",
    "sensitivity_set",
    "coverage_check",
    "sweep_and_fit",
    "calibrate",
]

# The default grid sweeps multipliers 1, 0, -1, ..., -7 applied to each
# axis base angle simultaneously; every axis is then fitted against its own
# angle values from the shared runs.
DEFAULT_MULTIPLIERS = tuple(1 - j for j in range(9))


@dataclass(frozen=True)
class ScAxis:
    """One compensation parameter: a rotation generator and its query terms."""

    qubit: int
    axis: str  # X, Y, or Z
    queries: tuple[Pauli, ...]
    base_angle_deg: float = 5.0

    def __post_init__(self):
        if self.axis not in ("X", "Y", "Z"):
            raise ValueError("rotation axis must be X, Y, or Z")
        if not self.queries:
            raise ValueError("each axis needs at least one query Pauli")
        if self.base_angle_deg <= 0:
            raise ValueError("base sweep angle must be positive")


@dataclass(frozen=True)
class ScConfig:
    hard: Cycle
    axes: tuple[ScAxis, ...]
    seed: int
    settings: PieSettings = PieSettings()
    multipliers: tuple[float, ...] = DEFAULT_MULTIPLIERS

    def __post_init__(self):
        if not self.axes:
            raise ValueError("need at least one calibration axis")
        if len(self.multipliers) < 3:
            raise ValueError("quadratic fit needs at least three sweep points")
        if any(not math.isfinite(m) for m in self.multipliers):
            raise ValueError("sweep multipliers must be finite")
        seen = set()
        for ax in self.axes:
            for q in ax.queries:
                key = (q.x, q.z)
                if key in seen:
                    raise ValueError(
                        f"query {q.label()} assigned to more than one axis"
                    )
                seen.add(key)

    @property
    def cycle_id(self) -> str:
        return self.hard.label or self.hard.describe()


def objective_estimate(
    queries: Sequence[Pauli],
    hard: Cycle,
    settings: PieSettings,
    model: NoiseModel,
    seed: int,
) -> tuple[float, float]:
    """Sum of estimated orbital fidelities over the query set."""
    res = pie_oracle(queries, hard, settings, model, seed)
    if res.failures:
        raise RuntimeError("objective estimation failed: " + "; ".join(res.failures))
    h = hard.clifford()
    value = 0.0
    var = 0.0
    counted: dict = {}
    for q in queries:
        counted[orbit(q.phaseless(), h)] = counted.get(orbit(q.phaseless(), h), 0) + 1
    for o, mult in counted.items():
        est = res.orbit_fidelities[o]
        value += mult * est.value
        var += (mult * est.sigma) ** 2
    return value, math.sqrt(var)


def sensitivity_set(queries: Sequence[Pauli], h: CliffordOp) -> set[Pauli]:
    """All Paulis on the touched supports that the objective can detect.

    A Pauli error moves the objective iff it anticommutes with at least one
    member of some query orbit.
    """
    members: list[Pauli] = []
    touched: set[int] = set()
    for q in queries:
        o = orbit(q.phaseless(), h)
        members.extend(o.members)
        for m in o.members:
            touched |= set(m.support)
    support = QubitSet(touched)
    out = set()
    for p in enumerate_subgroup(support, h.n):
        if any(chi(p, r) == -1 for r in members):
            out.add(p)
    return out


def coverage_check(
    targets: Sequence[Pauli], queries: Sequence[Pauli], h: CliffordOp
) -> list[Pauli]:
    """Target errors the query set is blind to (empty list means covered)."""
    sensitive = sensitivity_set(queries, h)
    keys = {(p.x, p.z) for p in sensitive}
    return [t for t in targets if (t.phaseless().x, t.phaseless().z) not in keys]


@dataclass(frozen=True)
class AxisFit:
    qubit: int
    axis: str
    angles_deg: tuple[float, ...]
    values: tuple[float, ...]
    sigmas: tuple[float, ...]
    coefficients: tuple[float, float, float]  # a, b, c of a t^2 + b t + c
    covariance: tuple[tuple[float, ...], ...]
    theta_star_deg: float
    theta_star_sigma_deg: float
    status: str  # ok | extrapolated | refused: ...
    residual_rms: float
    # Sweep angles whose objective estimate was rejected and excluded.
    dropped_deg: tuple[float, ...] = ()


@dataclass(frozen=True)
class ScSweep:
    config: ScConfig
    per_axis: tuple[AxisFit, ...]
    theta_star_deg: tuple[float, ...]


def _fit_axis(ax: ScAxis, angles, values, sigmas, dropped=()) -> AxisFit:
    t = np.asarray(angles, dtype=float)
    y = np.asarray(values, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    if len(t) < 3:
        return AxisFit(
            ax.qubit, ax.axis, tuple(angles), tuple(values), tuple(sigmas),
            (float("nan"),) * 3, ((float("nan"),) * 3,) * 3, float("nan"),
            float("nan"),
            "refused: fewer than three usable sweep points", float("nan"),
            tuple(dropped),
        )
    w = 1.0 / np.maximum(s, 1e-9)
    coeffs, cov = np.polyfit(t, y, 2, w=w, cov="unscaled")
    a, b, c = (float(v) for v in coeffs)
    resid = y - np.polyval(coeffs, t)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    if a >= 0:
        return AxisFit(
            ax.qubit, ax.axis, tuple(angles), tuple(values), tuple(sigmas),
            (a, b, c), tuple(map(tuple, cov)), float("nan"), float("nan"),
            "refused: fitted curvature is not concave", rms, tuple(dropped),
        )
    vertex = -b / (2 * a)
    grad = np.array([b / (2 * a * a), -1.0 / (2 * a), 0.0])
    sigma = float(np.sqrt(grad @ cov @ grad))
    spacing = float(np.max(np.abs(np.diff(np.sort(t))))) if len(t) > 1 else 0.0
    lo, hi = float(t.min()), float(t.max())
    status = "ok"
    if vertex < lo - spacing or vertex > hi + spacing:
        # Vertex extrapolated beyond one grid spacing; re-center the sweep.
        status = "extrapolated"
    return AxisFit(
        ax.qubit, ax.axis, tuple(angles), tuple(values), tuple(sigmas),
        (a, b, c), tuple(map(tuple, cov)), float(vertex), sigma, status, rms,
        tuple(dropped),
    )


def sweep_and_fit(config: ScConfig, model: NoiseModel, seed: int | None = None) -> ScSweep:
    """Shared sweep over all axes, then one weighted quadratic fit per axis.

    Every sweep point applies a compensation rotation on every axis at the
    same multiplier; the objective splits into per-axis terms because each
    axis's queries respond only to its own parameter.
    """
    if seed is None:
        seed = config.seed
    cycle_id = config.cycle_id
    per_point: list[list[tuple[float, float]]] = []  # [point][axis] -> (val, sig)
    for j, mult in enumerate(config.multipliers):
        comp = [
            CoherentTerm(ax.qubit, ax.axis, math.radians(mult * ax.base_angle_deg))
            for ax in config.axes
        ]
        swept = model.with_extra_coherent(cycle_id, comp)
        point_seed = int(
            np.random.SeedSequence(entropy=seed, spawn_key=(0x5C, j)).generate_state(1)[0]
        )
        entries: list[tuple[float, float] | None] = []
        for ax in config.axes:
            try:
                entries.append(
                    objective_estimate(
                        ax.queries, config.hard, config.settings, swept, point_seed
                    )
                )
            except RuntimeError:
                # Far sweep points can decay into the noise floor; drop the
                # point for this axis instead of aborting the whole sweep.
                entries.append(None)
        per_point.append(entries)
    fits = []
    for ai, ax in enumerate(config.axes):
        angles, values, sigmas, dropped = [], [], [], []
        for j, mult in enumerate(config.multipliers):
            angle = mult * ax.base_angle_deg
            entry = per_point[j][ai]
            if entry is None:
                dropped.append(angle)
            else:
                angles.append(angle)
                values.append(entry[0])
                sigmas.append(entry[1])
        fits.append(_fit_axis(ax, angles, values, sigmas, dropped))
    return ScSweep(config, tuple(fits), tuple(f.theta_star_deg for f in fits))


@dataclass(frozen=True)
class ScCalibration:
    sweep: ScSweep
    before: CerResult
    after: CerResult
    # Per-axis targeted weight-1 marginal before/after and the summed factor.
    targeted_before: tuple[float, ...]
    targeted_after: tuple[float, ...]
    reduction_factor: float


def calibrate(
    config: ScConfig,
    model: NoiseModel,
    seed: int | None = None,
    cer_k: int = 1,
) -> ScCalibration:
    """Sweep, apply the fitted compensation, and reconstruct before/after."""
    if seed is None:
        seed = config.seed
    sweep = sweep_and_fit(config, model, seed)
    bad = [f for f in sweep.per_axis if f.status.startswith("refused")]
    if bad:
        raise RuntimeError(
            "cannot calibrate: "
            + "; ".join(f"axis {f.axis}@{f.qubit}: {f.status}" for f in bad)
        )
    comp = [
        CoherentTerm(f.qubit, f.axis, math.radians(f.theta_star_deg))
        for f in sweep.per_axis
    ]
    calibrated = model.with_extra_coherent(config.cycle_id, comp)
    cer_cfg = CerConfig(
        config.hard, seed=seed + 1, k=cer_k, settings=config.settings
    )
    before = cer_run(cer_cfg, model)
    after = cer_run(cer_cfg, calibrated)
    t_before = []
    t_after = []
    for f in sweep.per_axis:
        target = Pauli.single(f.axis, f.qubit, config.hard.n)
        t_before.append(_targeted_marginal(before, target))
        t_after.append(_targeted_marginal(after, target))
    num = sum(t_before)
    den = sum(t_after)
    factor = num / den if den > 0 else float("inf")
    return ScCalibration(
        sweep, before, after, tuple(t_before), tuple(t_after), factor
    )


def _targeted_marginal(result: CerResult, target: Pauli) -> float:
    """Smallest-support marginal row containing the targeted error."""
    best = None
    for a, table in result.per_support.items():
        if set(target.support) <= set(a):
            if best is None or len(a) < len(best[0]):
                best = (a, table)
    if best is None:
        raise KeyError(f"no reconstructed support covers {target.label()}")
    return best[1].row_for(target.restrict(best[0])).mu
