"""
Input Generators

Desired tip-angle trajectories (degrees) sampled at the plant rate.
"""

import numpy as np
from scipy import signal

from general_utils import get_logger
from .config import InputSpec

logger = get_logger("inputs")


def time_axis(duration_s: float, sample_rate: float) -> np.ndarray:
    n = int(round(duration_s * sample_rate))
    return np.arange(n) / sample_rate


def gen_input(spec: InputSpec, sample_rate: float, speed_factor: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """
    Sample the input described by `spec`.

    - periodic / nonperiodic: sum of A_k sin(2 pi f_k t)
    - sweep: triangle wave of amplitude A at `rate_deg_s`, starting at 0 and rising

    Args:
        spec: Input description (validated)
        sample_rate: Samples per second
        speed_factor: Multiplies every frequency (and the sweep rate)

    Returns:
        (t in s, desired angle in degrees)
    """
    t = time_axis(spec.duration_s, sample_rate)
    if spec.kind == "sweep":
        amplitude = spec.amplitudes_deg[0]
        period = 4.0 * amplitude / (spec.rate_deg_s * speed_factor)
        values = amplitude * signal.sawtooth(2.0 * np.pi * t / period + np.pi / 2.0, width=0.5)
    else:
        values = np.zeros_like(t)
        for amplitude, freq in zip(spec.amplitudes_deg, spec.frequencies_hz):
            values += amplitude * np.sin(2.0 * np.pi * freq * speed_factor * t)
    logger.debug(f"{spec.kind} input: {t.size} samples, range [{values.min():.2f}, {values.max():.2f}] deg")
    return t, values


def calibration_sweep(sample_rate: float, amplitude_deg: float = 40.0, rate_deg_s: float = 40.0,
                      cycles: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Straight-shaft calibration motion: `cycles` triangle sweeps of +/- amplitude."""
    duration = cycles * 4.0 * amplitude_deg / rate_deg_s
    spec = InputSpec(kind="sweep", amplitudes_deg=[amplitude_deg], rate_deg_s=rate_deg_s, duration_s=duration)
    return gen_input(spec, sample_rate)
