"""Numerics for scattering with a confined nonlinearity on the unit interval.

Core capabilities: adaptive and integral-equation continuation of Jost
solutions through a complex delta spike plus amplitude nonlinearity,
reflection/transmission amplitudes, and location of the
amplitude-dependent zero-width resonances (their first-order theory,
the exact Newton solver, wavenumber sweeps and the nonlinearity
threshold).
"""

from .integrator import (
    IntegrationError,
    IvpResult,
    NonConvergent,
    StepLimitExceeded,
    ToleranceFailure,
    apply_delta_jump,
    integrate,
    picard_solve,
    rhs,
    write_trajectory,
)
from .model import (
    BoundaryData,
    ConfigError,
    Constant,
    CustomProfile,
    Kerr,
    PotentialSpec,
    Power,
    ProblemConfig,
    WaveState,
    load_config,
    parse_config,
    validate_config,
)
from .nss import (
    NegativeAmplitude,
    NoConvergence,
    NssPoint,
    SweepEntry,
    SweepResult,
    ThresholdResult,
    critical_k,
    nonlinearity_threshold,
    nss_residual,
    solve_nss,
    sweep_k,
)
from .perturbation import (
    AsymptoteProximity,
    PerturbativeNss,
    asymptotes,
    edge_coeff,
    first_order_validity,
    gamma_f_of_k,
    perturbative_nss,
    psi_end_first_order,
    strength_coeff,
    strength_first_order,
    strength_im_of_k,
)
from .scattering import (
    DivergentAmplitude,
    JostLeft,
    JostRight,
    ScatteringAmplitudes,
    jost_left,
    jost_right,
    left_tail,
    right_tail,
    rt_amplitudes,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoteProximity",
    "BoundaryData",
    "ConfigError",
    "Constant",
    "CustomProfile",
    "DivergentAmplitude",
    "IntegrationError",
    "IvpResult",
    "JostLeft",
    "JostRight",
    "Kerr",
    "NegativeAmplitude",
    "NoConvergence",
    "NonConvergent",
    "NssPoint",
    "PerturbativeNss",
    "PotentialSpec",
    "Power",
    "ProblemConfig",
    "ScatteringAmplitudes",
    "StepLimitExceeded",
    "SweepEntry",
    "SweepResult",
    "ThresholdResult",
    "ToleranceFailure",
    "WaveState",
    "apply_delta_jump",
    "asymptotes",
    "critical_k",
    "edge_coeff",
    "first_order_validity",
    "gamma_f_of_k",
    "integrate",
    "jost_left",
    "jost_right",
    "left_tail",
    "load_config",
    "nonlinearity_threshold",
    "nss_residual",
    "parse_config",
    "perturbative_nss",
    "picard_solve",
    "psi_end_first_order",
    "rhs",
    "right_tail",
    "rt_amplitudes",
    "solve_nss",
    "strength_coeff",
    "strength_first_order",
    "strength_im_of_k",
    "sweep_k",
    "validate_config",
    "write_trajectory",
    "__version__",
]
