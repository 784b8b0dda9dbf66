"""
Signal Conditioning

Butterworth low-pass used on every measured signal and the windowed
finite-difference gradient dC/dq that drives shift detection.

Online consumers (shift detection) use the causal filter with a warm start.
Offline consumers (identification of recorded sweeps) may use the zero-phase
variant.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import signal

from general_utils import get_logger
from .errors import FilterConfigError

logger = get_logger("dsp")

MIN_DELTA_Q = 1e-9


# =============================================================================
# Butterworth Low-Pass
# =============================================================================

@dataclass(frozen=True)
class FilterSpec:
    order: int = 3
    cutoff_hz: float = 20.0
    sample_rate_hz: float = 100.0

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise FilterConfigError(f"Filter order must be an integer >= 1, got {self.order}")
        if not self.sample_rate_hz > 0:
            raise FilterConfigError(f"Sample rate must be > 0, got {self.sample_rate_hz}")
        nyquist = self.sample_rate_hz / 2.0
        if not 0 < self.cutoff_hz < nyquist:
            raise FilterConfigError(
                f"Cutoff {self.cutoff_hz} Hz must lie in (0, {nyquist}) Hz for fs={self.sample_rate_hz} Hz"
            )


def butterworth_coefficients(spec: FilterSpec) -> tuple[np.ndarray, np.ndarray]:
    """
    Digital (b, a) of the low-pass, bilinear transform with pre-warping.

    Raises:
        FilterConfigError: If a recursion pole is not strictly inside the unit circle
    """
    b, a = signal.butter(spec.order, spec.cutoff_hz, btype="low", fs=spec.sample_rate_hz)
    poles = np.roots(a)
    if poles.size and not np.all(np.abs(poles) < 1.0):
        raise FilterConfigError(f"Unstable filter, max |pole| = {np.max(np.abs(poles)):.6f}")
    return b, a


class ButterworthFilter:
    """
    Causal IIR low-pass with mutable recursion state.

    The state is initialised from the first sample it sees, so a constant
    input passes through unchanged from the very first output.
    """

    def __init__(self, spec: FilterSpec):
        self.spec = spec
        self.b, self.a = butterworth_coefficients(spec)
        self._zi_unit = signal.lfilter_zi(self.b, self.a)
        self._zi: np.ndarray | None = None

    def reset(self) -> None:
        self._zi = None

    def update(self, sample: float) -> float:
        """Filter one sample."""
        if self._zi is None:
            self._zi = self._zi_unit * sample
        out, self._zi = signal.lfilter(self.b, self.a, [sample], zi=self._zi)
        return float(out[0])

    def filter(self, samples) -> np.ndarray:
        """Filter a block, continuing from the current state."""
        x = np.asarray(samples, dtype=float)
        if x.size == 0:
            return x.copy()
        if self._zi is None:
            self._zi = self._zi_unit * x[0]
        out, self._zi = signal.lfilter(self.b, self.a, x, zi=self._zi)
        return out


def butterworth_filter(spec: FilterSpec, samples) -> np.ndarray:
    """Causal single-pass filtering of a whole series with a fresh filter."""
    x = np.asarray(samples, dtype=float)
    if x.size < 1:
        raise FilterConfigError("Cannot filter an empty signal")
    return ButterworthFilter(spec).filter(x)


def zero_phase_filter(spec: FilterSpec, samples) -> np.ndarray:
    """
    Forward-backward filtering of a recorded series (no phase lag).

    Falls back to the causal filter when the series is too short for
    filtfilt's edge padding.
    """
    x = np.asarray(samples, dtype=float)
    b, a = butterworth_coefficients(spec)
    padlen = 3 * max(len(a), len(b))
    if x.size <= padlen:
        logger.debug(f"Series of {x.size} samples too short for filtfilt, using causal filter")
        return butterworth_filter(spec, x)
    return signal.filtfilt(b, a, x)


def magnitude_db(spec: FilterSpec, freq_hz: float) -> float:
    """Gain of the digital filter at `freq_hz`, in dB."""
    b, a = butterworth_coefficients(spec)
    _, h = signal.freqz(b, a, worN=[freq_hz], fs=spec.sample_rate_hz)
    return float(20.0 * np.log10(np.abs(h[0])))


# =============================================================================
# Gradient
# =============================================================================

def gradient(q_series, c_series, window: int = 5) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Windowed finite difference dC/dq.

    Entry i uses the window ending at i: (C[i] - C[s]) / (q[i] - q[s]) with
    s = max(0, i - window + 1). Windows whose |dq| is below 1e-9 rad take the
    last valid value and are flagged; leading invalid windows are backfilled
    from the first valid one.

    Args:
        q_series: Input positions (rad)
        c_series: Measured signal at those positions
        window: Samples per window (>= 2)

    Returns:
        (gradient, window-center q, carried flags)

    Raises:
        ValueError: Length mismatch, fewer than two samples or window < 2
    """
    q = np.asarray(q_series, dtype=float)
    c = np.asarray(c_series, dtype=float)
    if q.shape != c.shape:
        raise ValueError(f"q and C lengths differ: {q.shape} vs {c.shape}")
    if q.size < 2:
        raise ValueError("Gradient needs at least two samples")
    if window < 2:
        raise ValueError(f"Gradient window must be >= 2, got {window}")

    n = q.size
    idx = np.arange(n)
    start = np.maximum(0, idx - window + 1)
    dq = q - q[start]
    dc = c - c[start]
    valid = np.abs(dq) >= MIN_DELTA_Q

    values = np.zeros(n)
    values[valid] = dc[valid] / dq[valid]
    carried = ~valid
    if not valid.any():
        logger.warning("No window with a usable dq; gradient set to zero")
        return values, 0.5 * (q + q[start]), carried

    # forward-fill from the last valid window, backfill the leading gap
    last = np.where(valid, idx, -1)
    last = np.maximum.accumulate(last)
    first_valid = int(np.argmax(valid))
    last[last < 0] = first_valid
    values = values[last]
    return values, 0.5 * (q + q[start]), carried


class GradientEstimator:
    """Streaming version of gradient() over the most recent `window` samples."""

    def __init__(self, window: int = 3):
        if window < 2:
            raise ValueError(f"Gradient window must be >= 2, got {window}")
        self.window = window
        self._q: deque[float] = deque(maxlen=window)
        self._c: deque[float] = deque(maxlen=window)
        self._last: float | None = None
        self.carried = False

    def reset(self) -> None:
        self._q.clear()
        self._c.clear()
        self._last = None
        self.carried = False

    def push(self, q: float, c: float) -> float | None:
        """Add a sample; returns the gradient once the window is full, else None."""
        self._q.append(q)
        self._c.append(c)
        if len(self._q) < self.window:
            return None
        dq = self._q[-1] - self._q[0]
        if abs(dq) < MIN_DELTA_Q:
            self.carried = True
            return self._last
        self.carried = False
        self._last = (self._c[-1] - self._c[0]) / dq
        return self._last
