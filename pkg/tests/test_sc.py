import math

import pytest

from cerkit.channel import CoherentTerm, PauliDistribution
from cerkit.circuits import Cycle
from cerkit.clifford import clifford_from_cycle
from cerkit.pauli import Pauli
from cerkit.pie import PieSettings
from cerkit.sc import (
    ScAxis,
    ScConfig,
    _fit_axis,
    coverage_check,
    objective_estimate,
    sensitivity_set,
    sweep_and_fit,
)
from cerkit.sim import NoiseModel

FAST = PieSettings(m1=4, m2=32, shots=512, randomizations=30, bootstrap=200)


def test_axis_validation():
    q = Pauli.from_string("X@{0}", 2)
    with pytest.raises(ValueError):
        ScAxis(0, "W", (q,))
    with pytest.raises(ValueError):
        ScAxis(0, "Z", ())
    with pytest.raises(ValueError):
        ScAxis(0, "Z", (q,), base_angle_deg=-1.0)


def test_config_rejects_shared_queries():
    hard = Cycle("hard", (("I", (0,)), ("I", (1,))), 2, label="idle")
    q = Pauli.from_string("X@{0}", 2)
    with pytest.raises(ValueError):
        ScConfig(hard, (ScAxis(0, "Z", (q,)), ScAxis(1, "Z", (q,))), seed=1)


def test_sensitivity_set_size():
    h = clifford_from_cycle([("I", (0,)), ("I", (1,))], 2)
    s = sensitivity_set(
        [Pauli.from_string("Y@{0}", 2), Pauli.from_string("Y@{1}", 2)], h
    )
    assert len(s) == 12


def test_coverage_check():
    h = clifford_from_cycle([("I", (0,)), ("I", (1,))], 2)
    z0 = Pauli.from_string("Z@{0}", 2)
    x0 = Pauli.from_string("X@{0}", 2)
    assert coverage_check([z0], [z0], h) == [z0]
    assert coverage_check([z0], [x0], h) == []


def test_fit_axis_exact_parabola():
    ax = ScAxis(0, "Z", (Pauli.from_string("X@{0}", 1),))
    angles = [5.0 * (1 - j) for j in range(9)]
    values = [1.0 - 0.001 * (t + 12.0) ** 2 for t in angles]
    fit = _fit_axis(ax, angles, values, [1e-4] * 9)
    assert fit.status == "ok"
    assert math.isclose(fit.theta_star_deg, -12.0, abs_tol=1e-6)
    assert fit.residual_rms < 1e-9


def test_fit_axis_refuses_convex_curve():
    ax = ScAxis(0, "Z", (Pauli.from_string("X@{0}", 1),))
    angles = [5.0 * (1 - j) for j in range(9)]
    values = [0.9 + 0.001 * t ** 2 for t in angles]
    fit = _fit_axis(ax, angles, values, [1e-4] * 9)
    assert fit.status.startswith("refused")
    assert math.isnan(fit.theta_star_deg)


def test_fit_axis_flags_extrapolation():
    ax = ScAxis(0, "Z", (Pauli.from_string("X@{0}", 1),))
    angles = [5.0 * (1 - j) for j in range(9)]
    # Vertex at -80 degrees, far outside the sweep.
    values = [1.0 - 1e-5 * (t + 80.0) ** 2 for t in angles]
    fit = _fit_axis(ax, angles, values, [1e-6] * 9)
    assert fit.status == "extrapolated"


def test_fit_axis_refuses_too_few_points():
    ax = ScAxis(0, "Z", (Pauli.from_string("X@{0}", 1),))
    fit = _fit_axis(ax, [0.0, 5.0], [1.0, 0.9], [1e-4] * 2, dropped=(10.0,))
    assert fit.status.startswith("refused")
    assert fit.dropped_deg == (10.0,)


def test_objective_drops_with_injected_coherent_error():
    n = 2
    hard = Cycle("hard", (("I", (0,)), ("I", (1,))), n, label="idle")
    clean = NoiseModel(n)
    tilted = NoiseModel(
        n, coherent_terms={"idle": [CoherentTerm(0, "Z", math.radians(12.0))]}
    )
    q = [Pauli.from_string("X@{0}", n)]
    v0, s0 = objective_estimate(q, hard, FAST, clean, seed=3)
    v1, s1 = objective_estimate(q, hard, FAST, tilted, seed=3)
    assert v0 > v1 + 3 * math.hypot(s0, s1)


def test_sweep_recovers_injected_angle():
    n = 1
    hard = Cycle("hard", (("I", (0,)),), n, label="idle")
    model = NoiseModel(
        n, coherent_terms={"idle": [CoherentTerm(0, "Z", math.radians(7.5))]}
    )
    axes = (ScAxis(0, "Z", (Pauli.from_string("X@{0}", n),)),)
    cfg = ScConfig(hard, axes, seed=5, settings=FAST)
    sweep = sweep_and_fit(cfg, model)
    fit = sweep.per_axis[0]
    assert fit.status in ("ok", "extrapolated")
    assert abs(fit.theta_star_deg + 7.5) < 1.0
