"""
Experiment runner and reporting tests.

 Group 1 - Controller ordering on bent shafts (1-DoF and 2-DoF)
 Group 2 - Report semantics: skipped and failed controllers, statistics
 Group 3 - Outputs: files, determinism, worker independence, summaries
"""

import math

import numpy as np
import pandas as pd
import pytest

from conftest import BENT_45, BENT_90, STRAIGHT, scenario_doc
from experiment_utils import (
    REPORT_COLUMNS,
    ScenarioSpec,
    build_report,
    collect_reports,
    rmse,
    run_scenario,
    summarize_results,
    write_report,
    write_scenario_html,
)
from experiment_utils.runner import desired_inputs, true_params
from hysteresis_utils import (
    Axis,
    CatheterPlant,
    CompensationShift,
    ShiftEstimate,
    run_trajectory,
    trace_to_frame,
)

NONE, ONLY, SHIFT = "NoCompensation", "CompensationOnly", "CompensationShift"


def spec_of(doc: dict) -> ScenarioSpec:
    return ScenarioSpec.model_validate(doc)


def mean_of(report: pd.DataFrame, controller: str, metric: str, axis: str = "ap") -> float:
    row = report[(report["controller"] == controller) & (report["metric"] == metric)
                 & (report["scenario"].str.endswith(f"[{axis}]"))]
    assert len(row) == 1
    return float(row["mean_deg"].iloc[0])


@pytest.fixture(scope="module")
def bent_results():
    return {
        name: run_scenario(spec_of(scenario_doc(name, segments)))
        for name, segments in (("bent_45", BENT_45), ("bent_90", BENT_90))
    }


# =============================================================================
# Group 1 - Controller ordering
# =============================================================================

@pytest.mark.parametrize("name", ["bent_45", "bent_90"])
@pytest.mark.parametrize("metric", ["rmse", "ptpe"])
def test_shift_beats_only_beats_none(bent_results, name, metric):
    report = bent_results[name].report
    none, only, shift = (mean_of(report, c, metric) for c in (NONE, ONLY, SHIFT))
    assert none > only > shift, f"{name} {metric}: none={none:.3f} only={only:.3f} shift={shift:.3f}"


def test_uncompensated_error_grows_with_curvature(bent_results):
    assert mean_of(bent_results["bent_90"].report, NONE, "rmse") > mean_of(bent_results["bent_45"].report, NONE, "rmse")


def test_detected_offsets_follow_the_shape(bent_results):
    for name, expected in (("bent_45", 4.5), ("bent_90", 9.0)):
        for cell in bent_results[name].cells:
            if cell.controller == SHIFT:
                assert math.degrees(cell.estimates[Axis.AP].offset) == pytest.approx(expected, abs=2.0)


def test_model_matched_shift_compensation_is_within_one_degree():
    spec = spec_of(scenario_doc("bent_90", BENT_90))
    truth = true_params(spec, 0)
    cfg = spec.plant.to_config(truth[Axis.AP], truth[Axis.LR], spec.shape.to_shape())
    plant = CatheterPlant(cfg, seed=0)
    controller = CompensationShift(truth[Axis.AP], ShiftEstimate.known(truth[Axis.AP], cfg.offset(Axis.AP)))
    trace = trace_to_frame(run_trajectory(plant, desired_inputs(spec), {Axis.AP: controller}))
    steady = trace[trace["t"] >= spec.transient]
    assert rmse(steady["y_true"] - steady["q_desired"]) <= 1.0


def test_two_dof_ordering_holds_on_both_axes():
    doc = scenario_doc(
        "two_curvatures",
        [{"length_mm": 600.0},
         {"r_mm": 150.0, "alpha_deg": 45.0, "theta_deg": 0.0},
         {"r_mm": 150.0, "alpha_deg": 45.0, "theta_deg": 90.0}],
        dof="two",
        input={"kind": "nonperiodic", "amplitudes_deg": [30.0, 30.0],
               "frequencies_hz": [0.1, 0.1 * math.sqrt(3.0)], "duration_s": 20.0},
        transient_s=10.0,
        trials=1,
        seed=23,
    )
    result = run_scenario(spec_of(doc))
    for axis in ("ap", "lr"):
        none, only, shift = (mean_of(result.report, c, "rmse", axis) for c in (NONE, ONLY, SHIFT))
        assert none > only > shift, f"{axis}: none={none:.3f} only={only:.3f} shift={shift:.3f}"


def test_lr_input_runs_at_twice_the_speed():
    doc = scenario_doc("x", STRAIGHT, dof="two")
    inputs = desired_inputs(spec_of(doc))
    np.testing.assert_allclose(inputs[Axis.LR][:750], inputs[Axis.AP][::2], atol=1e-12)


# =============================================================================
# Group 2 - Report semantics
# =============================================================================

def test_straight_shaft_reports_shift_as_not_applicable():
    result = run_scenario(spec_of(scenario_doc("straight", STRAIGHT, trials=1)))
    shift_rows = result.report[result.report["controller"] == SHIFT]
    assert set(shift_rows["mean_deg"]) == {"-"}
    assert not any(cell.controller == SHIFT for cell in result.cells)
    assert mean_of(result.report, ONLY, "rmse") < mean_of(result.report, NONE, "rmse")


def test_detection_timeout_fails_only_the_shift_row():
    doc = scenario_doc("bent_90", BENT_90, trials=1, calibration="ground_truth",
                       detector={"max_iterations": 1})
    result = run_scenario(spec_of(doc))
    report = result.report
    assert set(report[report["controller"] == SHIFT]["mean_deg"]) == {"failed"}
    assert mean_of(report, ONLY, "rmse") > 0.0
    failed = [cell for cell in result.cells if cell.status == "failed"]
    assert [cell.controller for cell in failed] == [SHIFT]
    assert failed[0].detection_logs[Axis.AP]


def test_trials_share_a_catheter_and_catheters_differ():
    spec = spec_of(scenario_doc("bent_45", BENT_45, catheters=3))
    truths = [true_params(spec, m)[Axis.AP] for m in range(spec.catheters)]
    assert len({p.d_pos for p in truths}) == 3
    base = spec.true_params.to_params()
    for p in truths:
        assert abs(p.d_pos - base.d_pos) <= spec.jitter * abs(base.d_pos) + 1e-12
    assert true_params(spec, 1) == true_params(spec, 1)


def test_report_aggregates_over_catheters_and_trials():
    doc = scenario_doc("bent_45", BENT_45, catheters=2, trials=2, calibration="ground_truth",
                       controllers=["NoCompensation", "CompensationOnly"],
                       input={"kind": "periodic", "amplitudes_deg": [60.0],
                              "frequencies_hz": [0.5], "duration_s": 4.0})
    result = run_scenario(spec_of(doc))
    assert sorted((c.controller, c.catheter, c.trial) for c in result.cells) == sorted(
        (c, m, k) for c in (NONE, ONLY) for m in range(2) for k in range(2))
    per_cell = [cell.metrics[(Axis.AP, "rmse")] for cell in result.cells if cell.controller == NONE]
    row = result.report[(result.report["controller"] == NONE) & (result.report["metric"] == "rmse")].iloc[0]
    assert row["mean_deg"] == f"{np.mean(per_cell):.4f}"
    assert row["std_deg"] == f"{np.std(per_cell, ddof=1):.4f}"


def test_trial_files_are_numbered_across_catheters(tmp_path):
    doc = scenario_doc("bent_45", BENT_45, catheters=2, trials=2, calibration="ground_truth",
                       controllers=["NoCompensation"],
                       input={"kind": "periodic", "amplitudes_deg": [60.0],
                              "frequencies_hz": [0.5], "duration_s": 4.0})
    run_scenario(spec_of(doc), tmp_path)
    names = sorted(p.name for p in (tmp_path / "bent_45" / "traces").iterdir())
    assert names == [f"{NONE}_trial{k}.csv" for k in range(4)]


def test_standard_deviation_and_improvements_are_recomputable(bent_results):
    result = bent_results["bent_45"]
    report = result.report
    per_trial = {c: [cell.metrics[(Axis.AP, "rmse")] for cell in result.cells if cell.controller == c]
                 for c in (NONE, ONLY, SHIFT)}

    row = report[(report["controller"] == ONLY) & (report["metric"] == "rmse")].iloc[0]
    assert row["std_deg"] == f"{np.std(per_trial[ONLY], ddof=1):.4f}"
    none_mean, only_mean = np.mean(per_trial[NONE]), np.mean(per_trial[ONLY])
    assert row["improvement_vs_none_pct"] == f"{100.0 * (none_mean - only_mean) / none_mean:.2f}"
    assert row["improvement_vs_only_pct"] == ""

    shift_row = report[(report["controller"] == SHIFT) & (report["metric"] == "rmse")].iloc[0]
    assert float(shift_row["improvement_vs_only_pct"]) > 0.0


def test_build_report_layout():
    values = {(NONE, Axis.AP, "rmse"): [2.0, 4.0], (NONE, Axis.AP, "ptpe"): [5.0, 7.0],
              (ONLY, Axis.AP, "rmse"): [1.0, 1.0], (ONLY, Axis.AP, "ptpe"): [2.0, 2.0]}
    report = build_report("s", [Axis.AP], [NONE, ONLY, SHIFT], values,
                          {NONE: "ok", ONLY: "ok", SHIFT: "skipped"})
    assert list(report.columns) == REPORT_COLUMNS
    assert len(report) == 6
    none_rmse = report[(report["controller"] == NONE) & (report["metric"] == "rmse")].iloc[0]
    assert (none_rmse["mean_deg"], none_rmse["std_deg"]) == ("3.0000", f"{math.sqrt(2.0):.4f}")
    only_rmse = report[(report["controller"] == ONLY) & (report["metric"] == "rmse")].iloc[0]
    assert only_rmse["improvement_vs_none_pct"] == "66.67"
    assert set(report[report["controller"] == SHIFT]["mean_deg"]) == {"-"}


# =============================================================================
# Group 3 - Outputs
# =============================================================================

def test_outputs_are_written(tmp_path):
    spec = spec_of(scenario_doc("bent_45", BENT_45, trials=1))
    run_scenario(spec, tmp_path)
    out = tmp_path / "bent_45"
    assert (out / "report.csv").exists() and (out / "report.txt").exists()
    for controller in (NONE, ONLY, SHIFT):
        assert (out / "traces" / f"{controller}_trial0.csv").exists()
    assert (out / "detection" / f"{SHIFT}_trial0_ap.csv").exists()
    assert (out / "detection" / f"{SHIFT}_trial0.json").exists()
    assert (out / "calibration" / "catheter0.json").exists()

    header = (out / "figures" / "ap_time.dat").read_text(encoding="utf-8").splitlines()[0]
    assert header == f"# t q_desired y_{NONE} y_{ONLY} y_{SHIFT}"
    loop = np.loadtxt(out / "figures" / "ap_loop.dat")
    assert loop.shape == (1500, 4)


def test_report_file_matches_golden(tmp_path, golden):
    values = {(NONE, Axis.AP, "ptpe"): [8.0, 10.0], (NONE, Axis.AP, "rmse"): [4.0, 6.0],
              (ONLY, Axis.AP, "ptpe"): [3.0, 3.0], (ONLY, Axis.AP, "rmse"): [1.0, 2.0]}
    report = build_report("straight", [Axis.AP], [NONE, ONLY, SHIFT], values,
                          {NONE: "ok", ONLY: "ok", SHIFT: "skipped"})
    csv_path, _ = write_report(report, tmp_path)
    golden(csv_path, "straight_report.csv")


def test_identical_seeds_give_identical_reports(tmp_path):
    spec = spec_of(scenario_doc("bent_90", BENT_90, trials=1))
    run_scenario(spec, tmp_path / "a")
    run_scenario(spec, tmp_path / "b")
    for name in ("report.csv", "traces/CompensationShift_trial0.csv"):
        assert (tmp_path / "a" / "bent_90" / name).read_bytes() == (tmp_path / "b" / "bent_90" / name).read_bytes()


def test_worker_count_does_not_change_results(tmp_path):
    spec = spec_of(scenario_doc("bent_45", BENT_45, trials=2, calibration="ground_truth",
                                input={"kind": "periodic", "amplitudes_deg": [60.0],
                                       "frequencies_hz": [0.5], "duration_s": 4.0}))
    run_scenario(spec, tmp_path / "serial", jobs=1)
    run_scenario(spec, tmp_path / "parallel", jobs=2)
    serial = (tmp_path / "serial" / "bent_45" / "report.csv").read_bytes()
    assert serial == (tmp_path / "parallel" / "bent_45" / "report.csv").read_bytes()


def test_summary_has_one_row_per_controller_and_column_per_scenario(tmp_path):
    values = {(c, Axis.AP, m): [v, v + 0.5] for c, v in ((NONE, 10.0), (ONLY, 5.0), (SHIFT, 1.0))
              for m in ("ptpe", "rmse")}
    status = {NONE: "ok", ONLY: "ok", SHIFT: "ok"}
    for name in ("straight", "bent_45", "bent_90"):
        write_report(build_report(name, [Axis.AP], [NONE, ONLY, SHIFT], values, status), tmp_path / name)

    report, table = summarize_results(tmp_path)
    assert len(report) == 3 * 3 * 2
    assert (tmp_path / "summary.csv").exists() and (tmp_path / "summary.txt").exists()

    lines = table.splitlines()
    body = [line for line in lines if line.split() and line.split()[0] in (NONE, ONLY, SHIFT)]
    assert [line.split()[0] for line in body] == [NONE, ONLY, SHIFT]
    for label in ("straight[ap]", "bent_45[ap]", "bent_90[ap]"):
        assert label in table
    assert "10.25 +/- 0.35" in table


def test_collect_reports_needs_at_least_one_report(tmp_path):
    with pytest.raises(FileNotFoundError):
        collect_reports(tmp_path)


def test_scenario_html_is_rendered_from_traces(tmp_path):
    run_scenario(spec_of(scenario_doc("straight", STRAIGHT, trials=1)), tmp_path)
    path = write_scenario_html(tmp_path / "straight")
    assert path == tmp_path / "straight" / "figures.html"
    html = path.read_text(encoding="utf-8")
    assert "plotly" in html.lower() and NONE in html
    assert write_scenario_html(tmp_path / "empty") is None
