"""
Identification tests: calibration sweeps of the simulated straight shaft are
turned back into hysteresis parameters.
"""

import math

import numpy as np
import pytest

from experiment_utils import calibration_sweep
from hysteresis_utils import (
    DEFAULT_OMEGA,
    Axis,
    CatheterPlant,
    IdentificationError,
    NoCompensation,
    PlantConfig,
    identify_params,
    params_from_degrees,
    run_trajectory,
    trace_to_frame,
)

SAMPLE_STEP_DEG = 0.4   # 40 deg/s at 100 Hz


def sweep_trace(cfg: PlantConfig, q_deg: np.ndarray, axes=(Axis.AP,), seed: int = 0):
    plant = CatheterPlant(cfg, seed=seed)
    q = np.radians(q_deg)
    samples = run_trajectory(plant, {axis: q for axis in axes}, {axis: NoCompensation() for axis in axes})
    return trace_to_frame(samples)


@pytest.fixture(scope="module")
def noise_free_trace():
    _, q = calibration_sweep(100.0)
    return sweep_trace(PlantConfig(noise_std=0.0), q)


def test_noise_free_sweep_recovers_the_ground_truth(noise_free_trace):
    p = identify_params(noise_free_trace, Axis.AP, filter_current=False)
    assert math.degrees(p.d_pos) == pytest.approx(10.0, abs=SAMPLE_STEP_DEG)
    assert math.degrees(p.d_neg) == pytest.approx(-8.0, abs=SAMPLE_STEP_DEG)
    assert p.omega == pytest.approx(1.45, rel=0.01)
    assert math.degrees(p.b_pos) == pytest.approx(4.0, abs=0.05)
    assert math.degrees(p.b_neg) == pytest.approx(5.0, abs=0.05)
    assert p.h_neg <= p.h_pos


def test_reference_points_come_from_the_sweep_turning_points(noise_free_trace):
    p = identify_params(noise_free_trace, Axis.AP, filter_current=False)
    assert math.degrees(p.x_ref_pos) == pytest.approx(40.0, abs=SAMPLE_STEP_DEG)
    assert math.degrees(p.x_ref_neg) == pytest.approx(-40.0, abs=SAMPLE_STEP_DEG)


def test_noisy_sweep_with_filtering():
    _, q = calibration_sweep(100.0)
    trace = sweep_trace(PlantConfig(), q, seed=3)
    p = identify_params(trace, Axis.AP, filter_current=True)
    assert math.degrees(p.d_pos) == pytest.approx(10.0, abs=1.0)
    assert math.degrees(p.d_neg) == pytest.approx(-8.0, abs=1.0)
    assert p.omega == pytest.approx(1.45, rel=0.01)


def test_each_axis_is_identified_from_its_own_rows():
    _, q = calibration_sweep(100.0)
    cfg = PlantConfig(noise_std=0.0, true_params_lr=params_from_degrees(12.0, -6.0, 3.0, 2.0, omega=1.3))
    trace = sweep_trace(cfg, q, axes=(Axis.AP, Axis.LR))
    lr = identify_params(trace, Axis.LR, filter_current=False)
    assert math.degrees(lr.d_pos) == pytest.approx(12.0, abs=SAMPLE_STEP_DEG)
    assert math.degrees(lr.d_neg) == pytest.approx(-6.0, abs=SAMPLE_STEP_DEG)
    assert lr.omega == pytest.approx(1.3, rel=0.01)


def test_empty_trace_is_rejected(noise_free_trace):
    with pytest.raises(IdentificationError):
        identify_params(noise_free_trace.iloc[0:0], Axis.AP)


def test_sweep_without_negative_side_names_the_missing_edge():
    _, q = calibration_sweep(100.0)
    trace = sweep_trace(PlantConfig(noise_std=0.0), np.abs(q))
    with pytest.raises(IdentificationError, match="negative"):
        identify_params(trace, Axis.AP, filter_current=False)


def test_flat_current_is_rejected(noise_free_trace):
    flat = noise_free_trace.assign(current=0.25)
    with pytest.raises(IdentificationError):
        identify_params(flat, Axis.AP, filter_current=False)


def test_missing_engaged_lines_fall_back_to_default_slope(noise_free_trace):
    no_motion = noise_free_trace.assign(y_true=0.0)
    p = identify_params(no_motion, Axis.AP, filter_current=False)
    assert p.omega == DEFAULT_OMEGA
    assert p.b_pos == 0.0 and p.b_neg == 0.0
    assert math.degrees(p.d_pos) == pytest.approx(10.0, abs=SAMPLE_STEP_DEG)
