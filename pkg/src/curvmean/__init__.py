"""Frechet means on constant-curvature spaces.

Geometry primitives for the sphere, hyperbolic space and flat space, series
expansions of geodesic compositions driven by curvature callbacks, moment
algebra for the small-sample bias and covariance of the empirical mean, an
iterative mean estimator with a scikit-learn interface, and a seeded Monte
Carlo experiment runner with CSV output.
"""

from .curvature import CurvatureOracle
from .estimator import (
    FrechetMean,
    FrechetMeanReport,
    covariance_at,
    frechet_mean,
    variance_at,
)
from .exceptions import (
    ConfigError,
    ConvergenceError,
    CurvmeanError,
    CutLocusError,
    DegenerateHessianError,
    DegeneratePlaneError,
    DivergenceError,
    DomainError,
    ExperimentError,
    InvalidInputError,
)
from .experiments import (
    BiasCheckRecord,
    ExperimentConfig,
    ExpansionStudyRecord,
    ModulationRecord,
    bias_null_check,
    expansion_convergence_study,
    origin_of,
    run_modulation_experiment,
    variance_profile_s2,
    write_expansion_csv,
    write_modulation_csv,
    write_variance_profile_csv,
)
from .moments import (
    EmpiricalMeanMoments,
    clt_mean_covariance,
    empirical_mean_bias,
    empirical_mean_covariance,
    empirical_mean_moments,
    empirical_mean_second_moment_field,
    empirical_moment,
    empirical_moments,
    expected_log_mean_series,
    expected_sqdist_hessian,
    log_mean_series,
    modulation_asymptotic,
    modulation_limit,
    modulation_nonasymptotic,
    product_moment_expectation,
    recentered_tangent_mean_series,
)
from .series import (
    TRUNCATION_ORDER,
    double_exp_series,
    fit_loglog_slope,
    hessian_weight,
    neighbor_log_series,
    sqdist_hessian,
    squared_distance_series,
)
from .spaces import (
    Euclidean,
    Hyperbolic,
    KKCReport,
    SpaceForm,
    Sphere,
    kkc_check,
    space_form,
)

__version__ = "0.1.0"

__all__ = [
    "CurvatureOracle",
    "FrechetMean",
    "FrechetMeanReport",
    "covariance_at",
    "frechet_mean",
    "variance_at",
    "ConfigError",
    "ConvergenceError",
    "CurvmeanError",
    "CutLocusError",
    "DegenerateHessianError",
    "DegeneratePlaneError",
    "DivergenceError",
    "DomainError",
    "ExperimentError",
    "InvalidInputError",
    "BiasCheckRecord",
    "ExperimentConfig",
    "ExpansionStudyRecord",
    "ModulationRecord",
    "bias_null_check",
    "expansion_convergence_study",
    "origin_of",
    "run_modulation_experiment",
    "variance_profile_s2",
    "write_expansion_csv",
    "write_modulation_csv",
    "write_variance_profile_csv",
    "EmpiricalMeanMoments",
    "clt_mean_covariance",
    "empirical_mean_bias",
    "empirical_mean_covariance",
    "empirical_mean_moments",
    "empirical_mean_second_moment_field",
    "empirical_moment",
    "empirical_moments",
    "expected_log_mean_series",
    "expected_sqdist_hessian",
    "log_mean_series",
    "modulation_asymptotic",
    "modulation_limit",
    "modulation_nonasymptotic",
    "product_moment_expectation",
    "recentered_tangent_mean_series",
    "TRUNCATION_ORDER",
    "double_exp_series",
    "fit_loglog_slope",
    "hessian_weight",
    "neighbor_log_series",
    "sqdist_hessian",
    "squared_distance_series",
    "Euclidean",
    "Hyperbolic",
    "KKCReport",
    "SpaceForm",
    "Sphere",
    "kkc_check",
    "space_form",
]
