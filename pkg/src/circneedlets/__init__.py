"""Mexican needlets on the circle: frames, Poisson fields, normal-approximation
bounds, thresholding density estimation and a Monte Carlo verification harness.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    covariance_envelope,
    d2_rhs,
    effective_sample_size,
    theoretical_rate,
    wasserstein_rhs,
)
from .coefficients import (
    CoefficientMoments,
    CoefficientSample,
    CovarianceMatrix,
    beta_tilde,
    build_vector,
    depoissonized_vector,
    exact_covariance,
    population_moments,
)
from .density import (
    DensityEstimate,
    ThresholdConfig,
    empirical_coefficient,
    estimate_density,
    mise,
    plugin_kappa,
    threshold_config,
)
from .fields import (
    CircleDensity,
    PointSample,
    PoissonFieldConfig,
    builtin_density,
    derive_rng,
    floor_mixture_density,
    sample_iid,
    sample_poisson,
    uniform_density,
    von_mises_density,
)
from .montecarlo import (
    ExperimentGrid,
    GridResult,
    cell_summary,
    empirical_wasserstein_normal,
    histogram,
    rate_regression,
    run_grid,
    sample_cell,
)
from .needlets import (
    FrameConstants,
    NeedletParams,
    NeedletSpec,
    Partition,
    TrigPoly,
    calderon_constant,
    calderon_constant_quadrature,
    circular_distance,
    evaluate_needlet,
    frame_constants,
    frame_tightness_ratio,
    frame_window_bounds,
    lp_norm,
    make_partition,
    needlet_coefficient,
    needlet_spec,
    needlet_trig_poly,
    quadrature_grid,
    truncation_index,
    weight,
    wrap_angle,
)
from .swtest import NormalityResult, shapiro_wilk
