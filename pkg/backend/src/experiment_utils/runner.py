"""
Experiment Runner

Runs scenario files: for every controller, catheter and trial, build the
catheter, calibrate it on the straight shaft, detect the shift
(CompensationShift only), drive the trajectory and score the tracking error.

Catheters differ by a parameter jitter drawn once per catheter; trials repeat
the run on the same catheter with fresh sensor noise. Cells (controller x
catheter x trial) are independent and every random stream is derived from
(seed, catheter, stage[, trial]) so results do not depend on execution order
or on the number of worker processes.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from general_utils import get_logger, read_json, write_csv_atomic, write_json_atomic
from hysteresis_utils import (
    Axis,
    CatheterPlant,
    ControllerKind,
    DetectionTimeoutError,
    HysteresisParams,
    NoCompensation,
    ShiftEstimate,
    detect_shift,
    identify_params,
    jitter_params,
    make_controller,
    run_trajectory,
    straight_shaft,
    trace_to_frame,
    write_detection_log,
)
from .config import ExperimentConfig, ScenarioSpec
from .inputs import calibration_sweep, gen_input
from .metrics import error_series, ptpe, rmse
from .reporting import METRICS, build_report, format_table, write_figure_data, write_report

logger = get_logger("experiments")

STAGE_JITTER, STAGE_CALIBRATION, STAGE_DETECTION, STAGE_TRAJECTORY = range(4)


def stage_seed(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=tuple(key))


@dataclass
class CellResult:
    controller: str
    trial: int
    catheter: int = 0
    status: str = "ok"                 # ok | failed
    message: str = ""
    metrics: dict[tuple[Axis, str], float] = field(default_factory=dict)
    trace: pd.DataFrame | None = None
    calibration: dict[Axis, HysteresisParams] = field(default_factory=dict)
    estimates: dict[Axis, ShiftEstimate] = field(default_factory=dict)
    detection_logs: dict[Axis, tuple] = field(default_factory=dict)

    def stem(self, trials: int) -> str:
        """File stem; trials are numbered across catheters."""
        return f"{self.controller}_trial{self.catheter * trials + self.trial}"


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    report: pd.DataFrame
    cells: list[CellResult]

    @property
    def table(self) -> str:
        return format_table(self.report)


# =============================================================================
# Building Blocks
# =============================================================================

def true_params(spec: ScenarioSpec, catheter: int) -> dict[Axis, HysteresisParams]:
    """Ground truth of one catheter (jittered per axis, shared by all its trials)."""
    base = spec.true_params.to_params()
    rng = np.random.default_rng(stage_seed(spec.seed, catheter, STAGE_JITTER))
    return {axis: jitter_params(base, rng, spec.jitter) for axis in Axis}


def calibrate(spec: ScenarioSpec, catheter: int, truth: dict[Axis, HysteresisParams]) -> dict[Axis, HysteresisParams]:
    """Straight-shaft hysteresis the controllers are built from."""
    calib = dict(truth)
    if spec.calibration_file:
        doc = read_json(Path(spec.calibration_file))
        for axis in spec.axes:
            if axis.value not in doc:
                raise ValueError(f"{spec.calibration_file} has no parameters for axis {axis.value}")
            calib[axis] = HysteresisParams.from_document(doc[axis.value])
        return calib
    if spec.calibration == "ground_truth":
        return calib

    cfg = spec.plant.to_config(truth[Axis.AP], truth[Axis.LR], straight_shaft(
        beta_catheter=spec.shape.beta_catheter_mm, beta_knob=spec.shape.beta_knob_mm))
    cfg.wall_positions = {}
    plant = CatheterPlant(cfg, stage_seed(spec.seed, catheter, STAGE_CALIBRATION))
    _, sweep = calibration_sweep(cfg.sample_rate)
    inputs = {axis: np.radians(sweep) for axis in spec.axes}
    trace = trace_to_frame(run_trajectory(plant, inputs, {axis: NoCompensation() for axis in spec.axes}))
    for axis in spec.axes:
        calib[axis] = identify_params(trace, axis, filter_current=True, sample_rate=cfg.sample_rate)
    return calib


def desired_inputs(spec: ScenarioSpec) -> dict[Axis, np.ndarray]:
    """Desired angles (rad) per driven axis."""
    return {
        axis: np.radians(gen_input(spec.input, spec.plant.sample_rate, spec.speed_for(axis))[1])
        for axis in spec.axes
    }


def run_cell(spec: ScenarioSpec, controller: str, trial: int, catheter: int = 0) -> CellResult:
    """One controller, one trial on one catheter."""
    kind = ControllerKind.parse(controller)
    result = CellResult(controller=kind.value, trial=trial, catheter=catheter)
    truth = true_params(spec, catheter)
    shape = spec.shape.to_shape()
    cfg = spec.plant.to_config(truth[Axis.AP], truth[Axis.LR], shape)
    knob_limit = math.radians(spec.controller.knob_limit_deg)
    slew = None if spec.controller.slew_limit_deg_s is None else math.radians(spec.controller.slew_limit_deg_s)

    if kind is not ControllerKind.NO_COMPENSATION:
        result.calibration = calibrate(spec, catheter, truth)

    if kind is ControllerKind.COMPENSATION_SHIFT:
        detector = spec.detector.to_config()
        plant = CatheterPlant(cfg, stage_seed(spec.seed, catheter, STAGE_DETECTION, trial))
        for axis in spec.axes:
            try:
                estimate = detect_shift(detector, result.calibration[axis], plant, axis)
            except DetectionTimeoutError as e:
                logger.error(f"{spec.name} catheter {catheter} trial {trial}: detection on {axis.value} timed out")
                result.status, result.message = "failed", str(e)
                result.detection_logs[axis] = tuple(e.log)
                return result
            result.estimates[axis] = estimate
            result.detection_logs[axis] = estimate.log

    controllers = {
        axis: make_controller(kind, result.calibration.get(axis), result.estimates.get(axis), knob_limit, slew)
        for axis in spec.axes
    }
    plant = CatheterPlant(cfg, stage_seed(spec.seed, catheter, STAGE_TRAJECTORY, trial))
    result.trace = trace_to_frame(run_trajectory(plant, desired_inputs(spec), controllers))
    for axis in spec.axes:
        errors = error_series(result.trace, axis, spec.transient)
        result.metrics[(axis, "ptpe")] = ptpe(errors)
        result.metrics[(axis, "rmse")] = rmse(errors)
    logger.debug(f"{spec.name} {kind.value} catheter {catheter} trial {trial}: {result.metrics}")
    return result


def _run_cell_job(spec_json: str, controller: str, trial: int, catheter: int) -> CellResult:
    return run_cell(ScenarioSpec.model_validate_json(spec_json), controller, trial, catheter)


# =============================================================================
# Scenario
# =============================================================================

def skipped_controllers(spec: ScenarioSpec) -> set[str]:
    """CompensationShift is not run on a straight shaft (it equals CompensationOnly)."""
    if spec.shape.to_shape().is_straight:
        return {ControllerKind.COMPENSATION_SHIFT.value}
    return set()


def run_scenario(spec: ScenarioSpec, output_dir: Path | None = None, jobs: int = 1) -> ScenarioResult:
    """
    Run every (controller, catheter, trial) cell of a scenario and aggregate
    the report over all catheters and trials.

    A detection timeout fails only the affected cells; the controller is
    reported as failed when no cell succeeded.
    """
    logger.info(
        f"=== Scenario {spec.name}: {spec.catheters} catheters x {spec.trials} trials, "
        f"controllers {spec.controllers} ==="
    )
    skipped = skipped_controllers(spec)
    jobs_list = [
        (c, k, m) for c in spec.controllers if c not in skipped
        for m in range(spec.catheters) for k in range(spec.trials)
    ]

    if jobs > 1 and len(jobs_list) > 1:
        spec_json = spec.model_dump_json()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell_job, spec_json, c, k, m) for c, k, m in jobs_list]
            cells = [f.result() for f in futures]
    else:
        cells = [run_cell(spec, c, k, m) for c, k, m in jobs_list]

    values: dict[tuple[str, Axis, str], list[float]] = {}
    status: dict[str, str] = {c: "skipped" for c in skipped}
    for cell in cells:
        if cell.status != "ok":
            status.setdefault(cell.controller, "failed")
            continue
        status[cell.controller] = "ok"
        for axis in spec.axes:
            for metric in METRICS:
                values.setdefault((cell.controller, axis, metric), []).append(cell.metrics[(axis, metric)])

    report = build_report(spec.name, spec.axes, spec.controllers, values, status)
    result = ScenarioResult(spec=spec, report=report, cells=cells)
    if output_dir is not None:
        write_outputs(result, Path(output_dir) / spec.name)
    failed = [c.controller for c in cells if c.status != "ok"]
    if failed:
        logger.warning(f"{spec.name}: {len(failed)} failed cells ({sorted(set(failed))})")
    logger.info(f"=== Scenario {spec.name} done ===")
    return result


def write_outputs(result: ScenarioResult, out_dir: Path) -> None:
    """Traces, detection logs, calibrations, figure data and the report of one scenario."""
    first_trial: dict[str, pd.DataFrame] = {}
    for cell in result.cells:
        stem = cell.stem(result.spec.trials)
        if cell.trace is not None:
            write_csv_atomic(cell.trace, out_dir / "traces" / f"{stem}.csv")
            if cell.trial == 0 and cell.catheter == 0:
                first_trial[cell.controller] = cell.trace
        for axis, log in cell.detection_logs.items():
            write_detection_log(log, out_dir / "detection" / f"{stem}_{axis.value}.csv")
        if cell.estimates:
            write_json_atomic(out_dir / "detection" / f"{stem}.json",
                              {axis.value: est.to_document() for axis, est in cell.estimates.items()})
        if cell.calibration:
            write_json_atomic(out_dir / "calibration" / f"catheter{cell.catheter}.json",
                              {axis.value: p.to_document() for axis, p in cell.calibration.items()})
    for axis in result.spec.axes:
        write_figure_data(first_trial, axis, out_dir / "figures")
    write_report(result.report, out_dir)


def run_experiment(config: ExperimentConfig, output_dir: Path | None = None, jobs: int = 1) -> list[ScenarioResult]:
    return [run_scenario(spec, output_dir, jobs) for spec in config.scenarios]
