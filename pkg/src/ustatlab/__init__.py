"""U-statistics over stationary, possibly non-ergodic sequences.

A library plus experiment CLI for computing U-statistics of arbitrary
order (exactly or by uniform tuple sampling), simulating stationary
processes with a known ergodic decomposition, estimating the per-path
limit of the statistic, and running replicated convergence experiments
with L^p and max-error summaries.
"""

from .core import (
    ConfigurationError,
    InfeasibilityError,
    Kernel,
    Point,
    SamplePath,
    euclidean_distance,
    sign,
    validate_kernel_symmetry,
)
from .engine import (
    PrefixSeries,
    binomial_weighted_average,
    diagonal_sum,
    increasing_index_tuples,
    incomplete_u_statistic,
    prefix_u_statistics,
    trailing_pair_average,
    truncate_kernel,
    truncate_value,
    u_from_v_decomposition,
    u_statistic,
    v_statistic,
)
from .kernels import (
    Box,
    KernelSpec,
    build_kernel,
    dcov_core,
    dcov_kernel,
    distance_contrast,
    indicator_product_kernel,
    polynomial_product_kernel,
    registered_kernels,
    symmetry_test_kernel,
    table_kernel,
)
from .processes import (
    IID,
    EmpiricalLaw,
    Exponential,
    GaussianAR1,
    GaussianLinear,
    Mixture,
    Normal,
    PairedIndependent,
    ProductLaw,
    Uniform,
    autocovariance,
    cesaro_absolute_autocovariance,
    covariance_matrix,
    marginal_law,
    min_covariance_determinant,
    simulate,
)
from .limits import (
    LimitEstimate,
    RandomMeasureModel,
    component_law_for_path,
    estimate_limit,
    lp_error_curve,
    mixture_component_models,
    split_sample_model,
)
from .diagnostics import (
    ComponentCluster,
    ConvergenceReport,
    ExperimentConfig,
    convergence_experiment,
    indicator_convergence_experiment,
    reconstruction_identity_check,
    tail_mass_diagnostic,
)

__version__ = "0.1.0"
