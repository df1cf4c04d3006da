"""Personalized adaptive cruise control.

Learn per-driver car-following cost weights from demonstration
trajectories, drive a semi-autonomous vehicle with a receding-horizon
controller built on those weights, and measure the traffic-flow and
fuel effects on a small mixed platoon.
"""

from .control import (
    AccController,
    ControllerConfig,
    StepDecision,
    make_preview,
    predict,
    solve_step,
)
from .core import (
    FEATURE_NAMES,
    WEIGHT_FLOOR,
    DemonstrationSegment,
    DriverModel,
    DrivingCycle,
    FeatureVector,
    ValidationError,
    VehicleState,
    load_cycle,
    resample_cycle,
    save_cycle,
    validate_state,
)
from .evaluation import (
    FuelParams,
    MetricUndefinedError,
    Trace,
    TrafficReport,
    average_metrics,
    build_trace,
    default_fuel_params,
    fuel_params_from_mapping,
    fuel_rate,
    headway,
    load_trace,
    save_trace,
    total_fuel,
    wheel_power,
)
from .features import FeatureContext, horizon_features, segment_features
from .irl import (
    DriverBehaviorEstimator,
    LearnedResult,
    LearningConfig,
    feature_gradient,
    learn,
    load_model,
    min_observed_headway,
    most_likely_segment,
    observed_features,
    prediction_errors,
    save_model,
    synthesize_demonstration,
    update_weights,
)
from .optim import (
    BoxedProblem,
    InfeasibleError,
    OptResult,
    minimize_constrained,
    minimize_unconstrained,
)
from .scenario import (
    ComparisonResult,
    RunResult,
    ScenarioConfig,
    compare,
    initialize,
    load_scenario,
    run,
    trace_from_states,
    write_comparison,
    write_report,
)
from .traffic import (
    CollisionError,
    FleetState,
    IdmParams,
    equilibrium_gap,
    idm_accel,
    step_fleet,
)
from .trajectory import (
    QuinticSegment,
    SampledTrajectory,
    anchor,
    anchored_segment,
    central_difference,
    load_demonstration,
    save_demonstration,
    split_demonstration,
)

__version__ = "0.1.0"

__all__ = [
    "AccController",
    "BoxedProblem",
    "CollisionError",
    "ComparisonResult",
    "ControllerConfig",
    "DemonstrationSegment",
    "DriverBehaviorEstimator",
    "DriverModel",
    "DrivingCycle",
    "FEATURE_NAMES",
    "FeatureContext",
    "FeatureVector",
    "FleetState",
    "FuelParams",
    "IdmParams",
    "InfeasibleError",
    "LearnedResult",
    "LearningConfig",
    "MetricUndefinedError",
    "OptResult",
    "QuinticSegment",
    "RunResult",
    "SampledTrajectory",
    "ScenarioConfig",
    "StepDecision",
    "Trace",
    "TrafficReport",
    "ValidationError",
    "VehicleState",
    "WEIGHT_FLOOR",
    "anchor",
    "anchored_segment",
    "average_metrics",
    "build_trace",
    "central_difference",
    "compare",
    "default_fuel_params",
    "equilibrium_gap",
    "feature_gradient",
    "fuel_params_from_mapping",
    "fuel_rate",
    "headway",
    "horizon_features",
    "idm_accel",
    "initialize",
    "learn",
    "load_cycle",
    "load_demonstration",
    "load_model",
    "load_scenario",
    "load_trace",
    "make_preview",
    "min_observed_headway",
    "minimize_constrained",
    "minimize_unconstrained",
    "most_likely_segment",
    "observed_features",
    "predict",
    "prediction_errors",
    "resample_cycle",
    "run",
    "save_cycle",
    "save_demonstration",
    "save_model",
    "save_trace",
    "segment_features",
    "solve_step",
    "split_demonstration",
    "step_fleet",
    "synthesize_demonstration",
    "total_fuel",
    "trace_from_states",
    "update_weights",
    "validate_state",
    "wheel_power",
    "write_comparison",
    "write_report",
]
