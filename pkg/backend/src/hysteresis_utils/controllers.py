"""
Controllers

Open-loop strategies compared in the experiments:

- NoCompensation: the desired knob angle is sent as is.
- CompensationOnly: hysteresis inverse of the straight-shaft calibration.
- CompensationShift: hysteresis inverse of the calibration moved by the
  detected shift.

Compensating controllers track the model output by stepping their own copy of
the model with the commands they send. No measurement is fed back.
"""

import math
from abc import ABC, abstractmethod
from enum import Enum

from general_utils import get_logger
from .errors import ConfigError, SaturationError
from .hysteresis_core import (
    HysteresisParams,
    HysteresisState,
    initial_state,
    inverse,
    shift_params,
    step,
)
from .shift_detector import ShiftEstimate

logger = get_logger("controllers")

DEFAULT_KNOB_LIMIT = math.radians(120.0)


class ControllerKind(str, Enum):
    NO_COMPENSATION = "NoCompensation"
    COMPENSATION_ONLY = "CompensationOnly"
    COMPENSATION_SHIFT = "CompensationShift"

    @classmethod
    def parse(cls, name: "str | ControllerKind") -> "ControllerKind":
        """Case-insensitive lookup by value; also accepts 'none', 'only', 'shift'."""
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "").replace("-", "").replace("+", "")
        aliases = {"none": cls.NO_COMPENSATION, "only": cls.COMPENSATION_ONLY, "shift": cls.COMPENSATION_SHIFT}
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        if key in aliases:
            return aliases[key]
        raise ConfigError(f"Unknown controller '{name}'. Available: {', '.join(k.value for k in cls)}")


class BaseController(ABC):
    """One controller per knob axis, stepped sequentially."""

    kind: ControllerKind

    def __init__(self, knob_limit: float = DEFAULT_KNOB_LIMIT):
        if not knob_limit > 0:
            raise ConfigError(f"knob_limit must be > 0, got {knob_limit}")
        self.knob_limit = knob_limit
        self.saturation_count = 0

    @abstractmethod
    def command(self, q_desired: float, dt: float) -> float:
        """Knob command (rad) for the desired tip angle (rad)."""

    def reset(self) -> None:
        self.saturation_count = 0

    def get_state(self) -> dict:
        return {"kind": self.kind.value, "saturation_count": self.saturation_count}

    def _clamp(self, q: float) -> float:
        if abs(q) > self.knob_limit:
            self.saturation_count += 1
            return math.copysign(self.knob_limit, q)
        return q


class NoCompensation(BaseController):
    kind = ControllerKind.NO_COMPENSATION

    def command(self, q_desired: float, dt: float) -> float:
        return self._clamp(q_desired)


class CompensationOnly(BaseController):
    """
    Inverse compensation with a fixed model.

    On a reversal of the desired motion the command jumps across backlash and
    dead zone at once unless `slew_limit` (rad/s) is set.
    """
    kind = ControllerKind.COMPENSATION_ONLY

    def __init__(self, params: HysteresisParams, knob_limit: float = DEFAULT_KNOB_LIMIT,
                 slew_limit: float | None = None, q0: float = 0.0):
        super().__init__(knob_limit)
        if slew_limit is not None and not slew_limit > 0:
            raise ConfigError(f"slew_limit must be > 0 when set, got {slew_limit}")
        self.params = params
        self.slew_limit = slew_limit
        self.q0 = q0
        self.reset()

    def reset(self) -> None:
        super().reset()
        self.state: HysteresisState = initial_state(self.params, self.q0)
        self._q_desired_prev: float | None = None

    def command(self, q_desired: float, dt: float) -> float:
        if self._q_desired_prev is None:
            direction = 0
        else:
            delta = q_desired - self._q_desired_prev
            direction = (delta > 0) - (delta < 0)
        self._q_desired_prev = q_desired

        try:
            q = inverse(self.params, self.state, q_desired, direction, self.knob_limit)
        except SaturationError as e:
            self.saturation_count += 1
            logger.debug(f"{e}; clamped to {math.degrees(e.clamped_command):.2f} deg")
            q = e.clamped_command

        if self.slew_limit is not None:
            max_step = self.slew_limit * dt
            q = min(max(q, self.state.x_prev - max_step), self.state.x_prev + max_step)

        _, self.state = step(self.state, self.params, q, dt)
        return q

    def get_state(self) -> dict:
        state = super().get_state()
        state.update(branch=self.state.branch.value, model_output=self.state.y_prev)
        return state


class CompensationShift(CompensationOnly):
    """CompensationOnly on the calibration translated by a completed shift estimate."""
    kind = ControllerKind.COMPENSATION_SHIFT

    def __init__(self, params: HysteresisParams, shift: ShiftEstimate,
                 knob_limit: float = DEFAULT_KNOB_LIMIT, slew_limit: float | None = None, q0: float = 0.0):
        if shift is None:
            raise ConfigError("CompensationShift requires a completed ShiftEstimate")
        self.shift = shift
        self.calibration = params
        super().__init__(shift_params(params, shift.offset), knob_limit, slew_limit, q0)

    def get_state(self) -> dict:
        state = super().get_state()
        state["offset"] = self.shift.offset
        return state


def make_controller(kind: "str | ControllerKind", params: HysteresisParams | None = None,
                    shift: ShiftEstimate | None = None, knob_limit: float = DEFAULT_KNOB_LIMIT,
                    slew_limit: float | None = None) -> BaseController:
    """
    Build a controller by name.

    Raises:
        ConfigError: Unknown name, or missing params / shift estimate
    """
    kind = ControllerKind.parse(kind)
    if kind is ControllerKind.NO_COMPENSATION:
        return NoCompensation(knob_limit)
    if params is None:
        raise ConfigError(f"{kind.value} requires hysteresis parameters")
    if kind is ControllerKind.COMPENSATION_ONLY:
        return CompensationOnly(params, knob_limit, slew_limit)
    return CompensationShift(params, shift, knob_limit, slew_limit)
