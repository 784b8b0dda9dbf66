"""
Metric and input generator tests.

 Group 1 - ptpe / rmse / improvement rate / aggregation
 Group 2 - Periodic, non-periodic and sweep inputs
"""

import math
import statistics

import numpy as np
import pandas as pd
import pytest

from experiment_utils import (
    InputSpec,
    calibration_sweep,
    error_series,
    gen_input,
    improvement_rate,
    mean_std,
    ptpe,
    rmse,
    time_axis,
)
from hysteresis_utils import Axis, MetricError


# =============================================================================
# Group 1 - Metrics
# =============================================================================

def test_metric_examples():
    assert ptpe([1.0, -2.0, 0.5]) == pytest.approx(3.0)
    assert rmse([3.0, 4.0]) == pytest.approx(math.sqrt(12.5))
    assert rmse([0.0, 0.0, 0.0]) == 0.0
    assert improvement_rate(10.0, 2.5) == pytest.approx(75.0)
    assert improvement_rate(10.0, 12.0) == pytest.approx(-20.0)


def test_metric_bounds_on_random_errors():
    rng = np.random.default_rng(0)
    for _ in range(50):
        e = rng.normal(0.0, rng.uniform(0.1, 10.0), size=int(rng.integers(1, 200)))
        peak = np.max(np.abs(e))
        assert 0.0 <= ptpe(e) <= 2.0 * peak + 1e-12
        assert rmse(e) <= peak + 1e-12


@pytest.mark.parametrize("call", [
    lambda: ptpe([]),
    lambda: rmse([]),
    lambda: rmse([1.0, math.nan]),
    lambda: improvement_rate(0.0, 1.0),
    lambda: mean_std([]),
])
def test_invalid_metric_inputs_raise(call):
    with pytest.raises(MetricError):
        call()


def test_mean_std_uses_sample_deviation():
    values = [1.2, 3.4, 2.2]
    mean, std = mean_std(values)
    assert mean == pytest.approx(statistics.mean(values))
    assert std == pytest.approx(statistics.stdev(values))
    assert mean_std([4.0]) == (4.0, 0.0)


def test_error_series_drops_transient_and_other_axes():
    trace = pd.DataFrame({
        "t": [0.0, 0.5, 1.0, 1.0],
        "axis": ["ap", "ap", "ap", "lr"],
        "q_desired": [1.0, 2.0, 3.0, 9.0],
        "y_true": [0.0, 2.5, 2.0, 0.0],
    })
    np.testing.assert_allclose(error_series(trace, Axis.AP, transient_s=0.5), [0.5, -1.0])
    with pytest.raises(MetricError):
        error_series(trace, Axis.LR, transient_s=2.0)


# =============================================================================
# Group 2 - Inputs
# =============================================================================

def test_periodic_input_examples():
    spec = InputSpec(kind="periodic")
    t, x = gen_input(spec, 100.0)
    assert t.size == 7500
    assert x[0] == 0.0
    assert x[625] == pytest.approx(60.0, abs=1e-9)
    assert spec.first_period_s == pytest.approx(25.0)


def test_speed_factor_scales_frequency():
    spec = InputSpec(kind="periodic", duration_s=10.0)
    t, slow = gen_input(spec, 100.0)
    _, fast = gen_input(spec, 100.0, speed_factor=2.0)
    np.testing.assert_allclose(fast[:500], slow[::2], atol=1e-9)


def test_nonperiodic_input_never_repeats():
    _, x = gen_input(InputSpec(kind="nonperiodic"), 100.0)
    assert x.size == 15000
    for lag in range(100, x.size // 2):
        assert np.max(np.abs(x[lag:] - x[:-lag])) > 0.1, f"input repeats after {lag / 100.0} s"


def test_sweep_is_a_triangle_starting_upwards():
    t, x = gen_input(InputSpec(kind="sweep"), 100.0)
    assert x[0] == pytest.approx(0.0, abs=1e-9)
    assert x[100] == pytest.approx(40.0, abs=1e-9)
    assert x[300] == pytest.approx(-40.0, abs=1e-9)
    np.testing.assert_allclose(np.diff(x[:100]), 0.4, atol=1e-9)


def test_calibration_sweep_covers_two_cycles():
    t, x = calibration_sweep(100.0, amplitude_deg=40.0, rate_deg_s=40.0, cycles=2)
    assert t[-1] == pytest.approx(7.99)
    assert np.count_nonzero(np.isclose(x, 40.0)) == 2


def test_time_axis_rounds_sample_count():
    assert time_axis(1.0, 100.0).size == 100
    assert time_axis(0.015, 100.0).size == 2


@pytest.mark.parametrize("kwargs", [
    {"kind": "periodic", "frequencies_hz": [0.0]},
    {"kind": "periodic", "amplitudes_deg": [1.0, 2.0], "frequencies_hz": [0.1]},
    {"kind": "sweep", "amplitudes_deg": [-5.0]},
    {"kind": "periodic", "duration_s": 0.0},
    {"kind": "chirp"},
])
def test_invalid_inputs_are_rejected(kwargs):
    with pytest.raises(ValueError):
        InputSpec(**kwargs)
