"""Stabilizer Bell inequalities and fidelity certificates for graph states.

Build Bell inequalities from graph-state stabilizers, compute exact classical
bounds and quantum bounds, derive device-independent fidelity certificates
via extraction channels, simulate counting experiments, and estimate state
fidelity directly from stabilizer data.
"""

from ._kernels import ACTIVE_BACKEND
from .bell import (
    BellInequality,
    BellTerm,
    ConstructionSpec,
    MeasurementAngles,
    OPTIMAL_ANGLE,
    PRESET_NAMES,
    SiteLabel,
    bell_operator,
    build_inequality,
    classical_bound,
    experimental_frame,
    map_stabilizer,
    observables_from_angles,
    preset_construction,
    preset_family,
    preset_graph_state,
    preset_inequality,
    quantum_value,
    required_correlators,
    search_quantum_bound,
)
from .config import TOL, Tolerances
from .graphs import (
    GeneratorSet,
    Graph,
    PauliString,
    apply_hadamard_frame,
    build_graph_state,
    canonical_state,
    conjugate_by_hadamard,
    generators,
    multiply,
    pauli_to_matrix,
    stabilizer_element,
)
from .linalg import expectation, hermitian_eigen, kron, partial_trace
from .robustness import (
    FidelityCertificate,
    RobustnessCoefficients,
    bound_curve,
    certify,
    extraction_operator,
    extraction_tradeoff,
    format_uncertainty,
    offset_for_slope,
    optimize_coefficients,
    preset_coefficients,
)
from .simulate import (
    CorrelatorEstimate,
    CountsRecord,
    NoiseSpec,
    bell_value_from_counts,
    cluster_expectations,
    cluster_fidelity,
    cluster_stabilizer_table,
    estimate_correlator,
    ghz_fidelity_from_counts,
    ghz_fidelity_from_values,
    ghz_fidelity_terms,
    noisy_state,
    outcome_distribution,
    preset_noise,
    sample_counts,
    simulate_bell_records,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
