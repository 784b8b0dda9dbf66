"""
Plant Simulator

Simulated catheter: commanded knob angles in, tip bending angle and motor
current out. Each knob axis carries its own ground-truth hysteresis and the
shaft shape translates both the hysteresis and the current valley along the
input axis by the knob offset of that axis.

Current model (per axis, x = q - offset):
    C = baseline + gain * (sp(x - d_pos)^2 + sp(d_neg - x)^2)
        + wall_slope * (sp(q - upper) + sp(lower - q))
with sp(s) = log(1 + exp(k s)) / k, so C is C1, flat inside the dead zone and
strictly increasing with distance past either boundary.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Protocol

import numpy as np
import pandas as pd

from general_utils import get_logger, write_csv_atomic, TRACE_COLUMNS, FLOAT_FORMAT
from .errors import ConfigError, SensorError
from .hysteresis_core import (
    HysteresisParams,
    HysteresisState,
    Branch,
    initial_state,
    step,
    params_from_degrees,
)
from .shaft_geometry import ShaftShape, knob_offset, straight_shaft

logger = get_logger("plant")


class Axis(str, Enum):
    AP = "ap"  # anterior-posterior knob (phi1)
    LR = "lr"  # right-left knob (phi2)


def default_true_params() -> HysteresisParams:
    return params_from_degrees(d_pos=10.0, d_neg=-8.0, b_pos=4.0, b_neg=5.0)


# =============================================================================
# Configuration
# =============================================================================

@dataclass
class PlantConfig:
    """Ground truth and sensor model of one simulated catheter."""
    true_params_ap: HysteresisParams = field(default_factory=default_true_params)
    true_params_lr: HysteresisParams = field(default_factory=default_true_params)
    shape: ShaftShape = field(default_factory=straight_shaft)
    current_baseline: float = 0.25     # A
    current_gain: float = 100.0        # A/rad^2
    noise_std: float = 0.0015          # A
    sample_rate: float = 100.0         # Hz
    wall_positions: dict[Axis, tuple[float, float]] = field(default_factory=dict)  # (lower, upper) rad
    wall_slope: float = 1000.0         # A/rad
    softplus_k: float = 2000.0         # 1/rad

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ConfigError(f"sample_rate must be > 0, got {self.sample_rate}")
        if not self.noise_std >= 0:
            raise ConfigError(f"noise_std must be >= 0, got {self.noise_std}")
        if not self.current_gain > 0:
            raise ConfigError(f"current_gain must be > 0, got {self.current_gain}")
        if not self.softplus_k > 0 or not self.wall_slope > 0:
            raise ConfigError("softplus_k and wall_slope must be > 0")
        walls = {}
        for axis, bounds in self.wall_positions.items():
            lower, upper = bounds
            if lower is not None and upper is not None and not lower < upper:
                raise ConfigError(f"Wall bounds for {axis} must satisfy lower < upper, got {bounds}")
            walls[Axis(axis)] = (lower, upper)
        self.wall_positions = walls

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    def params(self, axis: Axis) -> HysteresisParams:
        return self.true_params_ap if Axis(axis) is Axis.AP else self.true_params_lr

    def offset(self, axis: Axis) -> float:
        """Knob offset (rad) the shaft shape imposes on `axis`."""
        phi = knob_offset(self.shape)
        return phi.phi1 if Axis(axis) is Axis.AP else phi.phi2


def _softplus(s: float, k: float) -> float:
    return float(np.logaddexp(0.0, k * s)) / k


def current_model(cfg: PlantConfig, axis: Axis, q: float, offset: float | None = None) -> float:
    """Noise-free motor current at command q."""
    axis = Axis(axis)
    p = cfg.params(axis)
    off = cfg.offset(axis) if offset is None else offset
    x = q - off
    k = cfg.softplus_k
    c = cfg.current_baseline + cfg.current_gain * (
        _softplus(x - p.d_pos, k) ** 2 + _softplus(p.d_neg - x, k) ** 2
    )
    lower, upper = cfg.wall_positions.get(axis, (None, None))
    if upper is not None:
        c += cfg.wall_slope * _softplus(q - upper, k)
    if lower is not None:
        c += cfg.wall_slope * _softplus(lower - q, k)
    return c


# =============================================================================
# Plant
# =============================================================================

@dataclass(frozen=True, slots=True)
class TraceSample:
    t: float
    axis: Axis
    q_desired: float
    q_commanded: float
    y_true: float
    current: float
    branch_id: Branch


class CatheterPlant:
    """
    One simulated catheter. Owns the per-axis hysteresis states and the noise RNG.

    The hysteresis of each axis is evaluated at q - offset with the unshifted
    ground truth, which makes a shaped shaft exactly equal to a straight one
    driven with translated inputs.
    """

    def __init__(self, cfg: PlantConfig, seed: int | np.random.SeedSequence = 0,
                 initial_q: Mapping[Axis, float] | None = None):
        self.cfg = cfg
        self._seed = seed
        self._offsets = {axis: cfg.offset(axis) for axis in Axis}
        # power-on knob angles, slack tendons
        self._initial_q = {axis: 0.0 for axis in Axis}
        self._initial_q.update({Axis(a): float(q) for a, q in (initial_q or {}).items()})
        self.reset()

    def reset(self) -> None:
        self.rng = np.random.default_rng(self._seed)
        self.states: dict[Axis, HysteresisState] = {
            axis: initial_state(self.cfg.params(axis), self._initial_q[axis] - self._offsets[axis])
            for axis in Axis
        }

    def offset(self, axis: Axis) -> float:
        return self._offsets[Axis(axis)]

    def plant_step(self, axis: Axis, q_command: float, dt: float | None = None) -> tuple[float, float]:
        """
        Apply one command on `axis`.

        Returns:
            (tip angle in rad, measured current in A)

        Raises:
            SensorError: If the current is not finite
        """
        axis = Axis(axis)
        dt = self.cfg.dt if dt is None else dt
        if not math.isfinite(q_command):
            raise SensorError(f"Non-finite command {q_command} on axis {axis.value}")
        y, self.states[axis] = step(
            self.states[axis], self.cfg.params(axis), q_command - self._offsets[axis], dt
        )
        current = current_model(self.cfg, axis, q_command, self._offsets[axis])
        if self.cfg.noise_std > 0:
            current += self.rng.normal(0.0, self.cfg.noise_std)
        if not math.isfinite(current):
            raise SensorError(f"Non-finite current at q={q_command} on axis {axis.value}")
        return y, current

    def branch(self, axis: Axis) -> Branch:
        return self.states[Axis(axis)].branch


class AxisController(Protocol):
    def command(self, q_desired: float, dt: float) -> float: ...


def run_trajectory(plant: CatheterPlant, inputs: Mapping[Axis, np.ndarray],
                   controllers: Mapping[Axis, AxisController]) -> list[TraceSample]:
    """
    Drive the plant with per-axis desired inputs (rad) through per-axis controllers.

    Axes are stepped independently in a fixed order (AP before LR) each tick.

    Raises:
        ConfigError: If input lengths differ or an axis has no controller
    """
    axes = [axis for axis in Axis if axis in {Axis(a) for a in inputs}]
    if not axes:
        raise ConfigError("run_trajectory needs at least one input axis")
    lengths = {len(inputs[axis]) for axis in axes}
    if len(lengths) != 1:
        raise ConfigError(f"Input lengths differ between axes: {sorted(lengths)}")
    missing = [axis.value for axis in axes if axis not in controllers]
    if missing:
        raise ConfigError(f"No controller for axis {', '.join(missing)}")

    n = lengths.pop()
    dt = plant.cfg.dt
    logger.debug(f"Trajectory: {n} ticks on {[a.value for a in axes]} at {plant.cfg.sample_rate} Hz")

    samples: list[TraceSample] = []
    for i in range(n):
        t = i * dt
        for axis in axes:
            q_d = float(inputs[axis][i])
            q_c = controllers[axis].command(q_d, dt)
            y, current = plant.plant_step(axis, q_c, dt)
            samples.append(TraceSample(t, axis, q_d, q_c, y, current, plant.branch(axis)))
    return samples


# =============================================================================
# Trace Export
# =============================================================================

def trace_to_frame(samples: list[TraceSample]) -> pd.DataFrame:
    """Trace as a DataFrame; angles converted to degrees."""
    df = pd.DataFrame(
        {
            "t": [s.t for s in samples],
            "axis": [s.axis.value for s in samples],
            "q_desired": np.degrees([s.q_desired for s in samples]),
            "q_commanded": np.degrees([s.q_commanded for s in samples]),
            "y_true": np.degrees([s.y_true for s in samples]),
            "current": [s.current for s in samples],
            "branch_id": [s.branch_id.value for s in samples],
        },
        columns=TRACE_COLUMNS,
    )
    return df


def write_trace(samples: list[TraceSample], path) -> pd.DataFrame:
    df = trace_to_frame(samples)
    write_csv_atomic(df, path, float_format=FLOAT_FORMAT)
    logger.info(f"Trace written: {path} ({len(df)} rows)")
    return df
