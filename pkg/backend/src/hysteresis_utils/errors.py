"""
Errors

Domain exceptions. Each derives from the built-in family it refines so callers
can catch either the specific class or ValueError / RuntimeError.
"""

from typing import Any


class GeometryError(ValueError):
    """Invalid shaft segment, shaft shape or knob radius."""


class ParameterError(ValueError):
    """Hysteresis parameters violate the model invariants."""


class SaturationError(ValueError):
    """A compensating command lies beyond the knob limit."""

    def __init__(self, message: str, clamped_command: float):
        super().__init__(message)
        self.clamped_command = clamped_command


class FilterConfigError(ValueError):
    """Filter specification is not realizable."""


class ConfigError(ValueError):
    """Scenario, plant or controller configuration is inconsistent."""


class IdentificationError(ValueError):
    """A calibration trace does not contain what identification needs."""


class MetricError(ValueError):
    """Error metric evaluated on an invalid series or baseline."""


class DetectionTimeoutError(RuntimeError):
    """Shift detection ran out of iterations; `log` holds the partial record."""

    def __init__(self, message: str, log: list[Any]):
        super().__init__(message)
        self.log = log


class SensorError(RuntimeError):
    """The plant returned a non-finite measurement."""
