"""Numerical simulator of a quantum-injected optical parametric amplifier.

Builds the multiphoton entangled output states, applies lossy single-photon
reduction with post-selection, simulates polarization tomography with
Poissonian counting noise, and computes the entanglement witnesses and
comparison scalars of the experiment.
"""

from .amplifier import (
    AmplifiedState,
    build_m_qubit,
    build_psi_h,
    build_psi_v,
    build_sigma,
    gamma_coeff,
    mean_photons,
    resolve_cutoff,
)
from .analysis import (
    WitnessReport,
    branch_hs_distance,
    entanglement_entropy_sigma,
    hs_distance,
    partial_trace,
    partial_transpose,
    ppt_min_eigenvalue,
    uhlmann_fidelity,
    von_neumann_entropy,
)
from .errors import ConvergenceError, DegenerateEventError, NonPhysicalStateError
from .fock_core import (
    MODE_NAMES,
    DensityMatrix,
    FockOccupation,
    GainParams,
    PolarizationQubit,
    SparseKet,
    bloch_rotate,
    density_from_json,
    density_to_json,
    inner_product,
    ket_from_json,
    ket_to_density,
    ket_to_json,
    superpose,
    union_basis,
)
from .loss_reduction import (
    LossSpec,
    ReducedState,
    brute_force_reduce,
    reduce_three_qubit,
    reduce_two_qubit,
)
from .tomography import (
    BootstrapResult,
    CountRecord,
    FringeScan,
    bootstrap_errors,
    expected_counts,
    expected_rate,
    fidelity_from_visibility,
    fringe_scan,
    linear_inversion,
    project_to_physical,
    projector,
    scheme_settings,
    simulate_counts,
    visibility,
    visibility_theory_k1,
)

__version__ = "0.1.0"
