"""Distance covariance and distance correlation for stochastic processes."""
from ._accel import backend_name, use_backend
from .core import (
    DegenerateSampleError,
    EstimateReport,
    Grid,
    InsufficientSampleError,
    InvalidArgumentError,
    NumericalDegeneracyError,
    PairedSample,
    SampledPath,
    make_equidistant_grid,
    rng_stream,
)
from .dcov_alpha import (
    AlphaEstimate,
    PoissonGrid,
    alpha_distance,
    c_k_constant,
    poisson_alpha_dcov,
    sample_poisson_grid,
)
from .dcov_density import (
    DcovDensityResult,
    distance_correlation,
    gof_distance,
    population_dcov_mc,
    ustat_dcov,
    vstat_dcov,
)
from .gaussian_sim import (
    ProcessModel,
    bm_cross_cov,
    evaluate_model_at_points,
    fbm_cross_cov,
    simulate_pair_sample,
)
from .kernels import (
    GAUSSIAN_KERNEL,
    KernelField,
    WeightKernel,
    build_kernel_field,
    integrated_exponent,
    kernel_value,
)
from .szekely import VectorSample, paths_to_vectors, szekely_dcor, szekely_dcov

__version__ = "0.1.0"
