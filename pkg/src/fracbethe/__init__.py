"""Approximate marginal inference in Gaussian Markov random fields.

Mean-field, Bethe and fractional pairwise free energies in moment
parameters, their tight upper/lower bounds, boundedness diagnostics from
the spectrum of the absolute coupling matrix, direct Newton minimization,
and fractional Gaussian message passing.
"""

from .diagnostics import (
    Boundedness,
    BoundednessVerdict,
    SpectralResult,
    boundary_margin,
    classify,
    critical_alpha,
    critical_r,
    diagnostics_report,
    spectral,
)
from .exact import ExactMarginals, exact_marginals, log_partition, sigma_error
from .free_energy import (
    EXACT_CONSTANT_CONVENTION,
    FreeEnergyValue,
    Moments,
    f_constrained,
    f_fractional,
    f_lower_bound,
    f_mean_field,
    gradient_constrained,
    ray_scan,
    sigma_star,
)
from .message_passing import (
    InitScheme,
    MessageSet,
    MPOptions,
    MPResult,
    MPStatus,
    Partition,
    Schedule,
    beliefs,
    init_messages,
    mp_run,
    partition_normalizable,
    partition_symmetric,
)
from .minimizer import (
    MinimizeResult,
    MinimizeStatus,
    NewtonOptions,
    find_local_minimum_on_ray,
    make_inits,
    newton_minimize,
)
from .model import (
    AlphaAssignment,
    GaussianModel,
    NormalizedModel,
    ValidationReport,
    load_model,
    make_k_regular,
    normalize,
    r_valid,
    random_model,
    save_model,
    validate,
)

__all__ = [
    "AlphaAssignment",
    "Boundedness",
    "BoundednessVerdict",
    "EXACT_CONSTANT_CONVENTION",
    "ExactMarginals",
    "FreeEnergyValue",
    "GaussianModel",
    "InitScheme",
    "MessageSet",
    "MinimizeResult",
    "MinimizeStatus",
    "Moments",
    "MPOptions",
    "MPResult",
    "MPStatus",
    "NewtonOptions",
    "NormalizedModel",
    "Partition",
    "Schedule",
    "SpectralResult",
    "ValidationReport",
    "beliefs",
    "boundary_margin",
    "classify",
    "critical_alpha",
    "critical_r",
    "diagnostics_report",
    "exact_marginals",
    "f_constrained",
    "f_fractional",
    "f_lower_bound",
    "f_mean_field",
    "find_local_minimum_on_ray",
    "gradient_constrained",
    "init_messages",
    "load_model",
    "log_partition",
    "make_inits",
    "make_k_regular",
    "mp_run",
    "newton_minimize",
    "normalize",
    "partition_normalizable",
    "partition_symmetric",
    "r_valid",
    "random_model",
    "ray_scan",
    "save_model",
    "sigma_error",
    "sigma_star",
    "spectral",
    "validate",
]
