"""
Experiment Configuration

Pydantic schema of scenario files. Files use degrees and millimetres; the
to_*() helpers build the radian-based domain objects.

Example:

    {
      "scenarios": [
        {
          "name": "bent_90",
          "shape": {"segments": [{"r_mm": 100.0, "alpha_deg": 90.0, "theta_deg": 0.0}]},
          "dof": "one_ap",
          "input": {"kind": "periodic"},
          "controllers": ["NoCompensation", "CompensationOnly", "CompensationShift"],
          "catheters": 2,
          "trials": 3,
          "seed": 7
        }
      ]
    }
"""

import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from general_utils import get_logger, read_json, write_json_atomic
from hysteresis_utils import (
    Axis,
    ControllerKind,
    DetectorConfig,
    HysteresisParams,
    PlantConfig,
    ShaftSegment,
    ShaftShape,
    params_from_degrees,
)

logger = get_logger("config")


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


# =============================================================================
# Geometry
# =============================================================================

class SegmentSpec(_Spec):
    """Curved segments give r_mm and alpha_deg; straight ones give length_mm."""
    r_mm: Optional[float] = Field(None, gt=0)
    alpha_deg: float = Field(0.0, ge=0)
    theta_deg: float = 0.0
    length_mm: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_kind(self) -> "SegmentSpec":
        if self.alpha_deg > 0 and self.r_mm is None:
            raise ValueError("curved segment (alpha_deg > 0) needs r_mm")
        if self.alpha_deg == 0 and self.length_mm is None:
            raise ValueError("straight segment (alpha_deg = 0) needs length_mm")
        return self

    def to_segment(self) -> ShaftSegment:
        theta = math.radians(self.theta_deg)
        if self.alpha_deg == 0:
            return ShaftSegment.straight(self.length_mm, theta)
        return ShaftSegment.curved(self.r_mm, math.radians(self.alpha_deg), theta)


class ShapeSpec(_Spec):
    segments: list[SegmentSpec] = Field(..., min_length=1)
    beta_catheter_mm: float = Field(1.0, gt=0)
    beta_knob_mm: float = Field(10.0, gt=0)

    def to_shape(self) -> ShaftShape:
        return ShaftShape(
            segments=tuple(seg.to_segment() for seg in self.segments),
            beta_catheter=self.beta_catheter_mm,
            beta_knob=self.beta_knob_mm,
        )


# =============================================================================
# Plant, Detector, Controllers
# =============================================================================

class ParamsSpec(_Spec):
    """Ground-truth hysteresis, shared by both knob axes before jitter."""
    d_pos_deg: float = 10.0
    d_neg_deg: float = -8.0
    b_pos_deg: float = Field(4.0, ge=0)
    b_neg_deg: float = Field(5.0, ge=0)
    omega: float = Field(1.45, gt=0)
    h_pos_deg: float = 0.0
    h_neg_deg: float = 0.0

    def to_params(self) -> HysteresisParams:
        return params_from_degrees(
            d_pos=self.d_pos_deg, d_neg=self.d_neg_deg, b_pos=self.b_pos_deg, b_neg=self.b_neg_deg,
            omega=self.omega, h_pos=self.h_pos_deg, h_neg=self.h_neg_deg,
        )


class PlantSpec(_Spec):
    current_baseline: float = 0.25
    current_gain: float = Field(100.0, gt=0)
    noise_std: float = Field(0.0015, ge=0)
    sample_rate: float = Field(100.0, gt=0)
    walls_deg: dict[Literal["ap", "lr"], tuple[Optional[float], Optional[float]]] = Field(default_factory=dict)

    def to_config(self, true_ap: HysteresisParams, true_lr: HysteresisParams, shape: ShaftShape) -> PlantConfig:
        walls = {
            Axis(axis): tuple(None if b is None else math.radians(b) for b in bounds)
            for axis, bounds in self.walls_deg.items()
        }
        return PlantConfig(
            true_params_ap=true_ap, true_params_lr=true_lr, shape=shape,
            current_baseline=self.current_baseline, current_gain=self.current_gain,
            noise_std=self.noise_std, sample_rate=self.sample_rate, wall_positions=walls,
        )


class DetectorSpec(_Spec):
    eps_upper: Optional[float] = Field(None, gt=0)
    eps_lower: Optional[float] = Field(None, gt=0)
    step_u_deg: float = Field(0.5, gt=0)
    max_iterations: int = Field(400, ge=1)
    initial_direction: Literal[1, -1] = 1
    gradient_window: int = Field(3, ge=2)
    settle_ticks: int = Field(5, ge=1)
    dwell_iterations: int = Field(30, ge=4)

    def to_config(self) -> DetectorConfig:
        return DetectorConfig(
            eps_upper=self.eps_upper, eps_lower=self.eps_lower,
            step_u=math.radians(self.step_u_deg), max_iterations=self.max_iterations,
            initial_direction=self.initial_direction, gradient_window=self.gradient_window,
            settle_ticks=self.settle_ticks, dwell_iterations=self.dwell_iterations,
        )


class ControllerSpec(_Spec):
    knob_limit_deg: float = Field(120.0, gt=0)
    slew_limit_deg_s: Optional[float] = Field(None, gt=0)


# =============================================================================
# Inputs and Scenarios
# =============================================================================

INPUT_DEFAULTS = {
    "periodic": {"amplitudes_deg": [60.0], "frequencies_hz": [0.04], "duration_s": 75.0},
    "nonperiodic": {"amplitudes_deg": [30.0, 30.0], "frequencies_hz": [0.02, 0.02 * math.sqrt(3.0)],
                    "duration_s": 150.0},
    "sweep": {"amplitudes_deg": [40.0], "frequencies_hz": [], "duration_s": 8.0, "rate_deg_s": 40.0},
}


class InputSpec(_Spec):
    """Desired tip-angle input. Unset fields take the defaults of their kind."""
    kind: Literal["periodic", "nonperiodic", "sweep"] = "periodic"
    amplitudes_deg: Optional[list[float]] = None
    frequencies_hz: Optional[list[float]] = None
    duration_s: Optional[float] = Field(None, gt=0)
    rate_deg_s: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _fill_defaults(self) -> "InputSpec":
        for key, value in INPUT_DEFAULTS[self.kind].items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        if self.kind == "sweep":
            if len(self.amplitudes_deg) != 1 or self.amplitudes_deg[0] <= 0:
                raise ValueError("sweep input needs one positive amplitude")
        else:
            if not self.frequencies_hz or len(self.frequencies_hz) != len(self.amplitudes_deg):
                raise ValueError("amplitudes_deg and frequencies_hz must be non-empty and of equal length")
            if any(f <= 0 for f in self.frequencies_hz):
                raise ValueError("frequencies must be > 0")
        return self

    @property
    def first_period_s(self) -> float:
        """Length of the first input cycle (the slowest component for sums of sines)."""
        if self.kind == "sweep":
            return 4.0 * self.amplitudes_deg[0] / self.rate_deg_s
        return 1.0 / min(self.frequencies_hz)


class ScenarioSpec(_Spec):
    name: str = Field(..., min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    shape: ShapeSpec
    dof: Literal["one_ap", "one_lr", "two"] = "one_ap"
    input: InputSpec = Field(default_factory=InputSpec)
    controllers: list[str] = Field(
        default_factory=lambda: [kind.value for kind in ControllerKind], min_length=1
    )
    catheters: int = Field(1, ge=1)
    trials: int = Field(3, ge=1)
    seed: int = Field(0, ge=0)
    jitter: float = Field(0.1, ge=0, lt=1)
    speed_factor: float = Field(2.0, gt=0)
    transient_s: Optional[float] = Field(None, ge=0)
    calibration: Literal["identify", "ground_truth"] = "identify"
    calibration_file: Optional[str] = None
    true_params: ParamsSpec = Field(default_factory=ParamsSpec)
    plant: PlantSpec = Field(default_factory=PlantSpec)
    detector: DetectorSpec = Field(default_factory=DetectorSpec)
    controller: ControllerSpec = Field(default_factory=ControllerSpec)

    @field_validator("controllers")
    @classmethod
    def _canonical_controllers(cls, names: list[str]) -> list[str]:
        kinds = [ControllerKind.parse(name).value for name in names]
        if len(set(kinds)) != len(kinds):
            raise ValueError(f"duplicate controllers in {names}")
        return kinds

    @property
    def axes(self) -> list[Axis]:
        return {"one_ap": [Axis.AP], "one_lr": [Axis.LR], "two": [Axis.AP, Axis.LR]}[self.dof]

    def speed_for(self, axis: Axis) -> float:
        """In 2-DoF runs the LR knob moves speed_factor times faster."""
        return self.speed_factor if self.dof == "two" and axis is Axis.LR else 1.0

    @property
    def transient(self) -> float:
        return self.input.first_period_s if self.transient_s is None else self.transient_s


class ExperimentConfig(_Spec):
    scenarios: list[ScenarioSpec] = Field(..., min_length=1)

    @field_validator("scenarios")
    @classmethod
    def _unique_names(cls, scenarios: list[ScenarioSpec]) -> list[ScenarioSpec]:
        names = [s.name for s in scenarios]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate scenario names: {', '.join(duplicates)}")
        return scenarios


# =============================================================================
# Loading
# =============================================================================

def load_config(path: str | Path, seed: int | None = None) -> ExperimentConfig:
    """
    Read and validate a scenario file.

    Relative calibration_file paths are resolved against the file's directory.
    `seed` overrides every scenario's seed.

    Raises:
        OSError: File cannot be read
        pydantic.ValidationError: Schema violation
    """
    path = Path(path)
    logger.info(f"Loading config: {path}")
    raw = read_json(path)
    for scenario in raw.get("scenarios", []) if isinstance(raw, dict) else []:
        calib = scenario.get("calibration_file") if isinstance(scenario, dict) else None
        if calib and not Path(calib).is_absolute():
            scenario["calibration_file"] = str((path.parent / calib).resolve())
        if seed is not None and isinstance(scenario, dict):
            scenario["seed"] = seed
    config = ExperimentConfig.model_validate(raw)
    logger.info(f"Config has {len(config.scenarios)} scenarios: {[s.name for s in config.scenarios]}")
    return config


def dump_config(config: ExperimentConfig, path: str | Path) -> Path:
    return write_json_atomic(Path(path), config.model_dump(mode="json"))
