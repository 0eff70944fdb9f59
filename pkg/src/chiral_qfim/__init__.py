"""Quantum Cramér–Rao sensitivity bounds for a lossy chiral optical channel.

The package estimates how precisely the four parameters of a birefringent
absorbing sample (differential and mean absorption, differential and
common phase) can be read out with coherent, single-photon, and two-photon
NOON probes.  It pairs a closed-form catalog with an independent numerical
pipeline (truncated Fock spaces, Kraus or RK4 channel propagation,
spectral SLD solves, QFIM assembly and inversion) plus a sweep engine and
a command-line front end.
"""

from .analytic import (
    COHERENT,
    FOCK_ONE_PLUS_ONE_MINUS,
    INTENSITY_MEASUREMENT,
    NOON_HV,
    QFIM_BOUND,
    SINGLE_PHOTON_H,
    InputStateKind,
    NoonCatalog,
    SensitivityReport,
    SinglePhotonCatalog,
    coherent_bounds,
    coherent_intensity_sensitivities,
    coherent_slds,
    default_param_labels,
    fidelity_fringe,
    fock_benchmark_bound,
    noon_catalog,
    noon_intensity_sensitivities,
    single_photon_catalog,
)
from .channel import (
    CHIRAL_NAMES,
    ChiralParams,
    CoordinateJacobian,
    DomainError,
    RatePicture,
    apply_channel_kraus,
    apply_channel_rk4,
    channel_alpha_derivative,
    channel_phi_derivative,
    coordinate_jacobian,
    noon_output_analytic,
)
from .estimation import (
    NumericError,
    ParamDerivative,
    QfimResult,
    SldMatrix,
    assemble_qfim,
    channel_derivatives,
    compute_bounds,
    invert_and_bound,
    qfim_from_derivatives,
    reparameterize_qfim,
    rho_derivative,
    solve_sld,
)
from .experiments import (
    FIDELITY_FRINGE,
    INTENSITY_ANALYTIC,
    INTENSITY_EXACT,
    QFIM_ANALYTIC,
    QFIM_NUMERIC,
    SWEEP_METHODS,
    ComparisonReport,
    IntensityStatistics,
    SweepRow,
    SweepSpec,
    compare_analytic_numeric,
    error_propagation_sensitivity,
    figure_presets,
    intensity_statistics,
    prepare_input_state,
    run_sweep,
    sweep_to_csv_text,
    write_sweep_csv,
)
from .fock import (
    FockSpace,
    ModeOperators,
    StateValidationError,
    TruncationError,
    TwoModeState,
    coherent_product_state,
    default_coherent_space,
    fock_product_state,
    hv_to_pm_amplitudes,
    hv_to_pm_state,
    min_cutoff_for_tail,
    mode_operators,
    poisson_tail,
)
from .linalg import (
    EigenConvergenceError,
    EigenDecomposition,
    commutator,
    dagger,
    hermitian_eigen,
    hermiticity_defect,
    is_hermitian,
    require_hermitian,
)

__version__ = "0.1.0"

__all__ = [
    "CHIRAL_NAMES",
    "COHERENT",
    "ChiralParams",
    "ComparisonReport",
    "CoordinateJacobian",
    "DomainError",
    "EigenConvergenceError",
    "EigenDecomposition",
    "FIDELITY_FRINGE",
    "INTENSITY_MEASUREMENT",
    "FOCK_ONE_PLUS_ONE_MINUS",
    "FockSpace",
    "INTENSITY_ANALYTIC",
    "INTENSITY_EXACT",
    "InputStateKind",
    "IntensityStatistics",
    "ModeOperators",
    "NOON_HV",
    "NoonCatalog",
    "NumericError",
    "ParamDerivative",
    "QFIM_ANALYTIC",
    "QFIM_BOUND",
    "QFIM_NUMERIC",
    "QfimResult",
    "RatePicture",
    "SINGLE_PHOTON_H",
    "SWEEP_METHODS",
    "SensitivityReport",
    "SinglePhotonCatalog",
    "SldMatrix",
    "StateValidationError",
    "SweepRow",
    "SweepSpec",
    "TruncationError",
    "TwoModeState",
    "apply_channel_kraus",
    "apply_channel_rk4",
    "assemble_qfim",
    "channel_alpha_derivative",
    "channel_derivatives",
    "channel_phi_derivative",
    "coherent_bounds",
    "coherent_intensity_sensitivities",
    "coherent_product_state",
    "coherent_slds",
    "commutator",
    "compare_analytic_numeric",
    "compute_bounds",
    "coordinate_jacobian",
    "dagger",
    "default_coherent_space",
    "default_param_labels",
    "error_propagation_sensitivity",
    "fidelity_fringe",
    "figure_presets",
    "fock_benchmark_bound",
    "fock_product_state",
    "hermitian_eigen",
    "hermiticity_defect",
    "hv_to_pm_amplitudes",
    "hv_to_pm_state",
    "intensity_statistics",
    "invert_and_bound",
    "is_hermitian",
    "min_cutoff_for_tail",
    "mode_operators",
    "noon_catalog",
    "noon_intensity_sensitivities",
    "noon_output_analytic",
    "poisson_tail",
    "prepare_input_state",
    "qfim_from_derivatives",
    "reparameterize_qfim",
    "require_hermitian",
    "rho_derivative",
    "run_sweep",
    "single_photon_catalog",
    "solve_sld",
    "sweep_to_csv_text",
    "write_sweep_csv",
]
