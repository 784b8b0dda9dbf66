from .errors import (
    GeometryError,
    ParameterError,
    SaturationError,
    FilterConfigError,
    ConfigError,
    IdentificationError,
    MetricError,
    DetectionTimeoutError,
    SensorError,
)
from .shaft_geometry import (
    ShaftSegment,
    ShaftShape,
    TendonLengths,
    TendonDeltas,
    KnobOffset,
    segment_tendon_lengths,
    total_tendon_lengths,
    total_deltas,
    knob_offset,
    straight_shaft,
    rotate_shape,
    split_segment,
)
from .hysteresis_core import (
    Branch,
    HysteresisParams,
    HysteresisState,
    DEFAULT_OMEGA,
    derive_params,
    params_from_degrees,
    shift_params,
    jitter_params,
    initial_state,
    step,
    simulate,
    inverse,
)
from .dsp import (
    FilterSpec,
    ButterworthFilter,
    GradientEstimator,
    butterworth_coefficients,
    butterworth_filter,
    zero_phase_filter,
    magnitude_db,
    gradient,
)
from .plant_sim import (
    Axis,
    PlantConfig,
    TraceSample,
    CatheterPlant,
    default_true_params,
    current_model,
    run_trajectory,
    trace_to_frame,
    write_trace,
)
from .shift_detector import (
    DetectorConfig,
    DetectionLogEntry,
    ShiftEstimate,
    detect_shift,
    noise_bound,
    log_to_frame,
    write_detection_log,
)
from .controllers import (
    ControllerKind,
    BaseController,
    NoCompensation,
    CompensationOnly,
    CompensationShift,
    make_controller,
    DEFAULT_KNOB_LIMIT,
)
from .identification import identify_params, find_dead_zone_edges

__all__ = [
    # Errors
    "GeometryError",
    "ParameterError",
    "SaturationError",
    "FilterConfigError",
    "ConfigError",
    "IdentificationError",
    "MetricError",
    "DetectionTimeoutError",
    "SensorError",
    # Shaft geometry
    "ShaftSegment",
    "ShaftShape",
    "TendonLengths",
    "TendonDeltas",
    "KnobOffset",
    "segment_tendon_lengths",
    "total_tendon_lengths",
    "total_deltas",
    "knob_offset",
    "straight_shaft",
    "rotate_shape",
    "split_segment",
    # Hysteresis model
    "Branch",
    "HysteresisParams",
    "HysteresisState",
    "DEFAULT_OMEGA",
    "derive_params",
    "params_from_degrees",
    "shift_params",
    "jitter_params",
    "initial_state",
    "step",
    "simulate",
    "inverse",
    # Signal conditioning
    "FilterSpec",
    "ButterworthFilter",
    "GradientEstimator",
    "butterworth_coefficients",
    "butterworth_filter",
    "zero_phase_filter",
    "magnitude_db",
    "gradient",
    # Plant
    "Axis",
    "PlantConfig",
    "TraceSample",
    "CatheterPlant",
    "default_true_params",
    "current_model",
    "run_trajectory",
    "trace_to_frame",
    "write_trace",
    # Shift detection
    "DetectorConfig",
    "DetectionLogEntry",
    "ShiftEstimate",
    "detect_shift",
    "noise_bound",
    "log_to_frame",
    "write_detection_log",
    # Controllers
    "ControllerKind",
    "BaseController",
    "NoCompensation",
    "CompensationOnly",
    "CompensationShift",
    "make_controller",
    "DEFAULT_KNOB_LIMIT",
    # Identification
    "identify_params",
    "find_dead_zone_edges",
]
