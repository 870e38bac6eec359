"""Cancel coherent Z crosstalk on spectator qubits by sweeping a fidelity sum.

The CX on qubits (1, 3) tilts its three spectators by 4.8, 15.1 and 20.8
degrees about Z on top of a 0.3% stochastic floor.  A nine-point shared
sweep of compensation angles traces a parabola per axis; the fitted vertex
is the angle that cancels the coherent part.  Before/after reconstructions
show the targeted marginals dropping to the stochastic floor.
"""

import math

from cerkit.channel import CoherentTerm, PauliDistribution
from cerkit.circuits import Cycle
from cerkit.pauli import Pauli
from cerkit.pie import PieSettings
from cerkit.sc import ScAxis, ScConfig, calibrate
from cerkit.sim import NoiseModel

n = 5
hard = Cycle(
    "hard",
    (("I", (0,)), ("CX", (1, 3)), ("I", (2,)), ("I", (4,))),
    n,
    label="cx13",
)

floor = PauliDistribution(n, {
    Pauli.identity(n): 1 - 3 * 0.003,
    Pauli.from_string("Z@{0}", n): 0.003,
    Pauli.from_string("Z@{2}", n): 0.003,
    Pauli.from_string("Z@{4}", n): 0.003,
})
crosstalk = [
    CoherentTerm(0, "Z", math.radians(4.8)),
    CoherentTerm(2, "Z", math.radians(15.1)),
    CoherentTerm(4, "Z", math.radians(20.8)),
]
model = NoiseModel(
    n, per_cycle_errors={"cx13": floor}, coherent_terms={"cx13": crosstalk}
)

# One X query per spectator: maximally sensitive to its own Z rotation.
axes = (
    ScAxis(0, "Z", (Pauli.from_string("X@{0}", n),)),
    ScAxis(2, "Z", (Pauli.from_string("X@{2}", n),)),
    ScAxis(4, "Z", (Pauli.from_string("X@{4}", n),)),
)
settings = PieSettings(m1=4, m2=32, shots=512, randomizations=30, bootstrap=200)
config = ScConfig(hard, axes, seed=99, settings=settings)

cal = calibrate(config, model)

print("fitted compensation angles (injected: -4.8, -15.1, -20.8):")
for fit in cal.sweep.per_axis:
    note = f" [{fit.status}]" if fit.status != "ok" else ""
    print(
        f"  Z on qubit {fit.qubit}: theta* = {fit.theta_star_deg:+.2f} "
        f"+- {fit.theta_star_sigma_deg:.2f} deg, fit rms "
        f"{fit.residual_rms:.1e}{note}"
    )
    if fit.dropped_deg:
        print(f"    dropped sweep points at {fit.dropped_deg} deg")

print("\ntargeted Z marginals on the spectators:")
for fit, before, after in zip(
    cal.sweep.per_axis, cal.targeted_before, cal.targeted_after
):
    print(f"  qubit {fit.qubit}: {before:.4f} -> {after:.4f} (floor 0.0030)")
print(f"\nsummed targeted error reduced {cal.reduction_factor:.1f}x")
