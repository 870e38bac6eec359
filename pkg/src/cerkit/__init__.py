"""Cycle error reconstruction and stochastic calibration toolkit.

Simulates randomized-compiled cycles under configurable Pauli, coherent, and
SPAM noise, estimates Pauli orbital fidelities from exponential decays, and
inverts them into marginal error tables.  A dense transfer-matrix oracle on
up to three qubits provides exact ground truth for every conversion.
"""

from .pauli import Pauli, QubitSet, chi, multiply, pauli_parse, enumerate_subgroup
from .clifford import (
    CliffordOp,
    OrbitSet,
    clifford_from_cycle,
    orbit,
    orbit_partition,
    invariance_check,
    pauli_order,
)
from .channel import (
    PauliDistribution,
    FidelityTable,
    MarginalTable,
    CoherentTerm,
    fidelity_from_dist,
    dist_from_fidelities,
    marginal,
    marginal_from_fidelities,
    orbit_marginal_from_orbit_fidelities,
    orbit_average,
    weight2_inversion,
    pauli_twirl_rotation,
    compose,
)

__all__ = [
    "Pauli",
    "QubitSet",
    "chi",
    "multiply",
    "pauli_parse",
    "enumerate_subgroup",
    "CliffordOp",
    "OrbitSet",
    "clifford_from_cycle",
    "orbit",
    "orbit_partition",
    "invariance_check",
    "pauli_order",
    "PauliDistribution",
    "FidelityTable",
    "MarginalTable",
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

__version__ = "0.1.0"
