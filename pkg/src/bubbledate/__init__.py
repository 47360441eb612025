"""Break-date estimation for bubble episodes.

Estimates when an explosive (bubble) regime emerges in a time series, when
it collapses, and when the series recovers to a unit root, by minimizing
split-sample sums of squared AR(1) residuals.  Ships with the matching
data-generating process, a Monte Carlo harness, and samplers for the limit
distributions of the date estimators.
"""
from .asymptotics import (
    BnDecomposition,
    Discretization,
    LimitSample,
    OuPath,
    ZeroLongRunVarianceError,
    bn_decompose,
    emergence_limit_draws,
    recovery_limit_draws,
    sample_emergence_limit,
    sample_ou_path,
    sample_recovery_limit,
)
from .dgp import (
    ErrorSpec,
    IidGaussian,
    LinearProcess,
    VolatilityScaled,
    batch_paths,
    generate_errors,
    path_from_errors,
    simulate,
    variance_profile,
)
from .estimator import (
    BicReport,
    BreakScan,
    DegenerateSegmentError,
    EmptyRangeError,
    ModelChoice,
    PrefixMoments,
    SegmentFit,
    argmin_break,
    bic_select,
    build_prefix_moments,
    estimate_dates,
    fit_segment,
    ssr_split,
)
from .montecarlo import (
    BicTally,
    CellKey,
    ExperimentConfig,
    ExperimentResult,
    HistogramResult,
    Target,
    preset,
    run_experiment,
)
from .types import (
    BreakEstimates,
    BubbleDateError,
    ConfigError,
    ConstantVolatility,
    DgpConfig,
    DerivedExponents,
    LinearProcessCoeffs,
    Series,
    SeriesValidationError,
    SingleShiftVolatility,
    TrimmingPolicy,
    UnavailableReason,
    collapse_exponent,
    derived_exponents,
    explosion_exponent,
    validate_series,
)

__version__ = "0.1.0"
