"""
Shift Detector

Gradient-based search for the shifted dead zone of one knob axis using only
the motor current. The knob is stepped from a start angle (by default the
centre of the calibrated dead zone); the slope of the filtered current along
the direction of travel decides what happens next:

    slope >= eps_upper  steep contact (e.g. a wall): reverse the search
    slope >= eps_lower  a dead-zone boundary: offset = q - boundary, done

A boundary is only accepted after the search has seen flat current. A start
that already lies on the current valley (the dead zone moved past it) turns
the search downhill once; that turn is not counted as a wall reversal. Only
one boundary needs to be reached unless a reversal happens.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
import pandas as pd

from general_utils import get_logger, write_csv_atomic
from .dsp import ButterworthFilter, FilterSpec, GradientEstimator
from .errors import ConfigError, DetectionTimeoutError, SensorError
from .hysteresis_core import HysteresisParams, shift_params
from .plant_sim import Axis, CatheterPlant

logger = get_logger("shift_detector")

DETECTION_LOG_COLUMNS = ["iteration", "q", "current", "grad", "direction", "event"]


@dataclass(frozen=True)
class DetectorConfig:
    """
    Search settings. Thresholds left as None are calibrated from a dwell at the
    start angle: eps_lower = max(|mean| + eps_sigma * std, eps_floor) of the
    plateau slope, eps_upper = eps_ratio * eps_lower.
    """
    eps_upper: float | None = None         # A/rad
    eps_lower: float | None = None         # A/rad
    step_u: float = math.radians(0.5)
    max_iterations: int = 400
    initial_direction: int = 1
    gradient_window: int = 3
    settle_ticks: int = 5
    dwell_iterations: int = 30
    eps_sigma: float = 6.0
    eps_ratio: float = 10.0
    eps_floor: float = 0.2
    filter_spec: FilterSpec = field(default_factory=FilterSpec)

    def __post_init__(self):
        if not self.step_u > 0:
            raise ConfigError(f"step_u must be > 0, got {self.step_u}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.initial_direction not in (1, -1):
            raise ConfigError(f"initial_direction must be +1 or -1, got {self.initial_direction}")
        if self.settle_ticks < 1 or self.dwell_iterations < self.gradient_window + 1:
            raise ConfigError("settle_ticks must be >= 1 and dwell_iterations > gradient_window")
        if self.gradient_window < 2:
            raise ConfigError(f"gradient_window must be >= 2, got {self.gradient_window}")
        lo, hi = self.eps_lower, self.eps_upper
        if lo is not None and not lo > 0:
            raise ConfigError(f"eps_lower must be > 0, got {lo}")
        if lo is not None and hi is not None and not lo < hi:
            raise ConfigError(f"eps_lower ({lo}) must be < eps_upper ({hi})")
        if not self.eps_ratio > 1 or not self.eps_floor > 0:
            raise ConfigError("eps_ratio must be > 1 and eps_floor > 0")


@dataclass(frozen=True)
class DetectionLogEntry:
    iteration: int
    q: float
    current: float
    grad: float | None
    direction: int
    event: str


@dataclass(frozen=True)
class ShiftEstimate:
    d_tilde_pos: float
    d_tilde_neg: float
    offset: float
    detected_side: Literal["positive", "negative"]
    iterations_used: int
    direction_flips: int
    eps_lower: float = 0.0
    eps_upper: float = 0.0
    log: tuple[DetectionLogEntry, ...] = ()

    @classmethod
    def known(cls, calib: HysteresisParams, offset: float) -> "ShiftEstimate":
        """Estimate for an offset known in advance (no search performed)."""
        shifted = shift_params(calib, offset)
        return cls(shifted.d_pos, shifted.d_neg, offset, "positive", 0, 0)

    def to_document(self) -> dict:
        return {
            "d_tilde_pos_deg": math.degrees(self.d_tilde_pos),
            "d_tilde_neg_deg": math.degrees(self.d_tilde_neg),
            "offset_deg": math.degrees(self.offset),
            "detected_side": self.detected_side,
            "iterations_used": self.iterations_used,
            "direction_flips": self.direction_flips,
            "eps_lower": self.eps_lower,
            "eps_upper": self.eps_upper,
        }


def noise_bound(eps_lower: float, step_u: float, gradient_window: int, current_gain: float) -> float:
    """
    Overshoot (rad) past a boundary before the slope reaches eps_lower, for the
    quadratic current valley: sqrt(eps_lower * (window - 1) * u / gain).
    """
    return math.sqrt(eps_lower * (gradient_window - 1) * step_u / current_gain)


def log_to_frame(log) -> pd.DataFrame:
    """Detection log as a DataFrame (angles in degrees)."""
    return pd.DataFrame(
        {
            "iteration": [e.iteration for e in log],
            "q": [math.degrees(e.q) for e in log],
            "current": [e.current for e in log],
            "grad": [np.nan if e.grad is None else e.grad for e in log],
            "direction": [e.direction for e in log],
            "event": [e.event for e in log],
        },
        columns=DETECTION_LOG_COLUMNS,
    )


def write_detection_log(log, path) -> pd.DataFrame:
    df = log_to_frame(log)
    write_csv_atomic(df, path)
    return df


# =============================================================================
# Detection
# =============================================================================

class _Probe:
    """Commands one axis and returns the filtered current after settling."""

    def __init__(self, plant: CatheterPlant, axis: Axis, cfg: DetectorConfig):
        self.plant = plant
        self.axis = axis
        self.settle_ticks = cfg.settle_ticks
        self.filter = ButterworthFilter(replace(cfg.filter_spec, sample_rate_hz=plant.cfg.sample_rate))

    def measure(self, q: float) -> float:
        filtered = math.nan
        for _ in range(self.settle_ticks):
            _, current = self.plant.plant_step(self.axis, q)
            if not math.isfinite(current):
                raise SensorError(f"Non-finite current {current} at q={q}")
            filtered = self.filter.update(current)
        return filtered


def calibrate_thresholds(cfg: DetectorConfig, probe: _Probe, q: float) -> tuple[float, float]:
    """Measure the plateau slope noise while holding q; returns (eps_lower, eps_upper)."""
    lag = cfg.gradient_window - 1
    readings = np.array([probe.measure(q) for _ in range(cfg.dwell_iterations)])
    slopes = (readings[lag:] - readings[:-lag]) / (lag * cfg.step_u)
    eps_lower = cfg.eps_lower
    if eps_lower is None:
        eps_lower = max(abs(float(np.mean(slopes))) + cfg.eps_sigma * float(np.std(slopes)), cfg.eps_floor)
    eps_upper = cfg.eps_upper if cfg.eps_upper is not None else cfg.eps_ratio * eps_lower
    if not eps_lower < eps_upper:
        raise ConfigError(f"Calibrated eps_lower {eps_lower:.4g} is not below eps_upper {eps_upper:.4g}")
    logger.debug(f"Thresholds: eps_lower={eps_lower:.4g}, eps_upper={eps_upper:.4g} A/rad")
    return eps_lower, eps_upper


def detect_shift(cfg: DetectorConfig, calib: HysteresisParams, plant: CatheterPlant,
                 axis: Axis = Axis.AP, start_q: float | None = None) -> ShiftEstimate:
    """
    Locate the shifted dead zone of `axis` on `plant`.

    Args:
        cfg: Search settings
        calib: Parameters identified on the straight shaft
        plant: Plant handle, stepped in place
        axis: Knob axis to search
        start_q: Start angle (rad); defaults to the calibrated dead-zone centre

    Returns:
        ShiftEstimate with both boundaries moved by one common offset

    Raises:
        DetectionTimeoutError: max_iterations reached without a boundary (carries the log)
        SensorError: Non-finite current reading
    """
    axis = Axis(axis)
    q = calib.center if start_q is None else start_q
    logger.info(f"=== Shift detection on {axis.value}: start {math.degrees(q):.2f} deg ===")

    probe = _Probe(plant, axis, cfg)
    eps_lower, eps_upper = calibrate_thresholds(cfg, probe, q)
    estimator = GradientEstimator(cfg.gradient_window)
    direction = cfg.initial_direction
    flips = 0
    # a boundary only counts once the search has crossed flat current
    seen_flat = False
    left_start_slope = False
    log: list[DetectionLogEntry] = []

    current = probe.measure(q)
    estimator.push(q, current)
    log.append(DetectionLogEntry(0, q, current, None, direction, "start"))

    for iteration in range(1, cfg.max_iterations + 1):
        q = q + direction * cfg.step_u
        current = probe.measure(q)
        slope = estimator.push(q, current)
        grad = None if slope is None else direction * slope

        if grad is not None and abs(grad) < eps_lower:
            seen_flat = True

        if grad is not None and grad >= eps_lower and not seen_flat and not left_start_slope:
            # started outside the dead zone, climbing away from it
            log.append(DetectionLogEntry(iteration, q, current, grad, direction, "reverse"))
            direction = -direction
            left_start_slope = True
            estimator.reset()
            estimator.push(q, current)
            logger.info(f"Start lies outside the dead zone (slope {grad:.3g} A/rad), searching downhill")
            continue

        if grad is not None and grad >= eps_upper:
            log.append(DetectionLogEntry(iteration, q, current, grad, direction, "flip"))
            direction = -direction
            flips += 1
            estimator.reset()
            estimator.push(q, current)
            logger.info(f"Steep slope {grad:.3g} A/rad at {math.degrees(q):.2f} deg, reversing")
            continue

        if grad is not None and grad >= eps_lower:
            boundary = calib.d_pos if direction > 0 else calib.d_neg
            offset = q - boundary
            side = "positive" if direction > 0 else "negative"
            log.append(DetectionLogEntry(iteration, q, current, grad, direction, "detect"))
            shifted = shift_params(calib, offset)
            logger.info(
                f"=== Boundary found on {side} side after {iteration} iterations: "
                f"offset {math.degrees(offset):.3f} deg ==="
            )
            return ShiftEstimate(
                d_tilde_pos=shifted.d_pos,
                d_tilde_neg=shifted.d_neg,
                offset=offset,
                detected_side=side,
                iterations_used=iteration,
                direction_flips=flips,
                eps_lower=eps_lower,
                eps_upper=eps_upper,
                log=tuple(log),
            )

        log.append(DetectionLogEntry(iteration, q, current, grad, direction, "step"))

    logger.error(f"Shift detection on {axis.value} timed out after {cfg.max_iterations} iterations")
    raise DetectionTimeoutError(
        f"No dead-zone boundary found within {cfg.max_iterations} iterations", log=log
    )
