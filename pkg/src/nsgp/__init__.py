"""Convolution-based nonstationary spatial Gaussian process modeling.

Local anisotropy, variance, and nugget fields are mixtures over a fixed set
of component locations; components are estimated by restricted maximum
likelihood on radius-limited neighborhoods, global variance quantities are
re-estimated with the spatially-varying structure held fixed, and prediction
is plug-in kriging.  A seeded simulator and proper-scoring evaluation close
the loop for round-trip validation.
"""

__version__ = "0.1.0"

from .correlation import FAMILIES, correlation
from .covariance import (
    covariance_matrix,
    nonstationary_covariance,
    stationary_covariance,
)
from .errors import (
    ConfigurationError,
    DataError,
    InvalidParameterError,
    NotPositiveDefiniteError,
    NsgpError,
    NumericalError,
    RankDeficiencyError,
    SkipComponentError,
    UnfittableConfigurationError,
)
from .fitting import (
    FitConfig,
    FittedModel,
    LocalFitResult,
    OptimizerSettings,
    default_config,
    fit_anisotropic,
    fit_nonstationary,
    local_fit,
    ols_variance,
)
from .geometry import (
    MixtureComponents,
    evaluate_param_field,
    kernel_matrix,
    mixture_weights,
    neighborhood_counts,
    param_fields,
    scaled_distance,
    spectral_params,
)
from .likelihood import SPDFactor, full_loglik, gls, restricted_loglik, spd_factor
from .prediction import PredictionResult, predict
from .scoring import crps_gaussian, evaluate_predictions, mspe
from .simulation import (
    KernelGlmCoefs,
    SimOutput,
    component_grid,
    default_weight_scale,
    glm_kernels,
    grid_locations,
    simulate_field,
)

__all__ = [
    "FAMILIES",
    "ConfigurationError",
    "DataError",
    "FitConfig",
    "FittedModel",
    "InvalidParameterError",
    "KernelGlmCoefs",
    "LocalFitResult",
    "MixtureComponents",
    "NotPositiveDefiniteError",
    "NsgpError",
    "NumericalError",
    "OptimizerSettings",
    "PredictionResult",
    "RankDeficiencyError",
    "SPDFactor",
    "SimOutput",
    "SkipComponentError",
    "UnfittableConfigurationError",
    "component_grid",
    "correlation",
    "covariance_matrix",
    "crps_gaussian",
    "default_config",
    "default_weight_scale",
    "evaluate_param_field",
    "evaluate_predictions",
    "fit_anisotropic",
    "fit_nonstationary",
    "full_loglik",
    "glm_kernels",
    "gls",
    "grid_locations",
    "kernel_matrix",
    "local_fit",
    "mixture_weights",
    "mspe",
    "neighborhood_counts",
    "nonstationary_covariance",
    "ols_variance",
    "param_fields",
    "predict",
    "restricted_loglik",
    "scaled_distance",
    "simulate_field",
    "spd_factor",
    "spectral_params",
    "stationary_covariance",
]
