"""Stationary analysis and simulation of one-dimensional multi-level
reflecting Brownian motions: exact piecewise-exponential stationary laws,
two independent path simulators, and Monte Carlo checks of the analytic
identities that tie them together."""

from .model import (
    LevelSpec,
    MultiLevelModel,
    Segment,
    Stability,
    NonIncreasingBoundaries,
    NonPositiveSigma,
    LengthMismatch,
    NegativeState,
    build_model,
    extract_spec,
    coefficients_at,
    level_index,
    stability_check,
    segments,
    boundary_arrays,
)
from .sde import (
    PathRecord,
    CrossingState,
    EnsembleStats,
    HittingTime,
    InvalidHorizon,
    InvalidSwitchLevels,
    UnknownBandwidth,
    UnknownLevel,
    euler_step,
    simulate_path,
    simulate_crossing_construction,
    simulate_ensemble,
    ensemble_from_paths,
    local_time_estimate,
    hitting_time,
)
from .analytic import (
    StationaryLaw,
    MgfValue,
    SegmentKind,
    Unstable,
    WrongK,
    ZeroDriftPresent,
    PositiveTheta,
    ConjectureUnstable,
    InvalidProfile,
    segment_weights,
    weights_k2_reference,
    stationary_law,
    density_at,
    density_closed_form,
    cdf_at,
    mgf_segment,
    sample_stationary,
    stationary_mean,
    stability_integral,
    step_profile,
    conjectured_density_general,
)
from .diagnostics import (
    CheckResult,
    DiagnosticsReport,
    TooFewSamples,
    NotStationaryRun,
    MissingAccumulators,
    RegimeViolation,
    model_digest,
    ks_threshold,
    ks_distance,
    ks_two_sample,
    bar_residual_analytic,
    check_bar_identity,
    check_local_time_identities,
    check_hitting_time_formula,
    tanaka_residual,
    run_battery,
)

__version__ = "0.1.0"
