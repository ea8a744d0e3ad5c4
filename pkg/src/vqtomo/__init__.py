"""Variational quantum state tomography from incomplete, noisy projective
measurements, solved as a semidefinite program with an in-repo interior-point
solver; includes measurement-set generation, noise simulation,
incompatible-data detection, and witness-based entanglement diagnostics."""

from .bases import (
    ProjectorSet,
    gell_mann_observables,
    linear_inversion,
    load_projector_set,
    mub,
    observables_to_projectors,
    overlap_matrix,
    save_projector_set,
)
from .linalg import (
    fidelity,
    herm_eig,
    kron,
    matrix_sqrt,
    partial_transpose,
    purity,
    trace_distance,
)
from .solver import ConicProgram, ConicSolution, LinOp, SolverSettings, kkt_residuals, solve
from .states import (
    MeasurementRecord,
    NoiseModel,
    exact_probabilities,
    noisy_frequencies,
    random_density,
    random_pure,
    swap_operator,
    werner_state,
)
from .tomography import (
    TomographyProblem,
    TomographyResult,
    assemble_sdp,
    cost_operator,
    detect_incompatible,
    diagnostics,
    problem_from_records,
    reconstruct,
)
from .witness import decomposable_witness, entanglement_fraction, entanglement_value

__version__ = "0.1.0"

__all__ = [
    "ProjectorSet",
    "gell_mann_observables",
    "linear_inversion",
    "load_projector_set",
    "mub",
    "observables_to_projectors",
    "overlap_matrix",
    "save_projector_set",
    "fidelity",
    "herm_eig",
    "kron",
    "matrix_sqrt",
    "partial_transpose",
    "purity",
    "trace_distance",
    "ConicProgram",
    "ConicSolution",
    "LinOp",
    "SolverSettings",
    "kkt_residuals",
    "solve",
    "MeasurementRecord",
    "NoiseModel",
    "exact_probabilities",
    "noisy_frequencies",
    "random_density",
    "random_pure",
    "swap_operator",
    "werner_state",
    "TomographyProblem",
    "TomographyResult",
    "assemble_sdp",
    "cost_operator",
    "detect_incompatible",
    "diagnostics",
    "problem_from_records",
    "reconstruct",
    "decomposable_witness",
    "entanglement_fraction",
    "entanglement_value",
    "__version__",
]
