"""
Error Metrics

Peak-to-peak error, RMSE and improvement rate over tracking-error series in
degrees.
"""

import numpy as np
import pandas as pd

from hysteresis_utils import Axis, MetricError


def _as_series(errors) -> np.ndarray:
    e = np.asarray(errors, dtype=float).ravel()
    if e.size == 0:
        raise MetricError("Error series is empty")
    if not np.all(np.isfinite(e)):
        raise MetricError("Error series contains non-finite values")
    return e


def ptpe(errors) -> float:
    """max(e) - min(e)."""
    e = _as_series(errors)
    return float(np.max(e) - np.min(e))


def rmse(errors) -> float:
    """sqrt(mean(e^2))."""
    e = _as_series(errors)
    return float(np.sqrt(np.mean(np.square(e))))


def improvement_rate(baseline: float, ours: float) -> float:
    """Error reduction relative to `baseline`, in percent."""
    if not baseline > 0:
        raise MetricError(f"Baseline must be > 0, got {baseline}")
    return 100.0 * (baseline - ours) / baseline


def error_series(trace: pd.DataFrame, axis: Axis, transient_s: float = 0.0) -> np.ndarray:
    """y_true - q_desired (degrees) for one axis, samples before `transient_s` dropped."""
    rows = trace[(trace["axis"] == Axis(axis).value) & (trace["t"] >= transient_s)]
    if rows.empty:
        raise MetricError(f"No samples for axis {Axis(axis).value} after t={transient_s} s")
    return (rows["y_true"] - rows["q_desired"]).to_numpy(dtype=float)


def mean_std(values) -> tuple[float, float]:
    """Mean and sample standard deviation (0 for a single value)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise MetricError("No values to aggregate")
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return float(np.mean(v)), std
