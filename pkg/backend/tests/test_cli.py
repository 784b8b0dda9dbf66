"""
Command line tests: subcommands end to end and the exit code contract.
"""

import json

import numpy as np
import pytest

import cli
from conftest import BENT_90, STRAIGHT, scenario_doc
from experiment_utils import calibration_sweep
from general_utils import write_csv_atomic
from hysteresis_utils import Axis, CatheterPlant, NoCompensation, PlantConfig, run_trajectory, trace_to_frame


def small(name: str, segments: list[dict], **overrides) -> dict:
    return scenario_doc(name, segments, **{"trials": 1, **overrides})


# =============================================================================
# Subcommands
# =============================================================================

def test_run_writes_reports_and_is_reproducible(tmp_path, write_config):
    config = write_config(small("bent_90", BENT_90, calibration="ground_truth"))
    assert cli.main(["run", str(config), "--output-dir", str(tmp_path / "a"), "-q"]) == 0
    assert cli.main(["run", str(config), "--output-dir", str(tmp_path / "b"), "-q"]) == 0
    first = (tmp_path / "a" / "bent_90" / "report.csv").read_bytes()
    assert first == (tmp_path / "b" / "bent_90" / "report.csv").read_bytes()


def test_run_on_straight_shaft_matches_recorded_report(tmp_path, write_config, golden):
    config = write_config(small("straight", STRAIGHT, calibration="ground_truth"))
    assert cli.main(["run", str(config), "--output-dir", str(tmp_path), "-q"]) == 0
    golden(tmp_path / "straight" / "report.csv", "straight_run_report.csv")


def test_identify_writes_parameter_file(tmp_path):
    _, q = calibration_sweep(100.0)
    plant = CatheterPlant(PlantConfig(), seed=5)
    trace = trace_to_frame(run_trajectory(plant, {Axis.AP: np.radians(q)}, {Axis.AP: NoCompensation()}))
    trace_path = write_csv_atomic(trace, tmp_path / "sweep.csv")

    assert cli.main(["identify", str(trace_path), "--output-dir", str(tmp_path), "-q"]) == 0
    doc = json.loads((tmp_path / "params.json").read_text(encoding="utf-8"))
    assert list(doc) == ["ap"]
    assert doc["ap"]["d_pos_deg"] == pytest.approx(10.0, abs=1.0)
    assert doc["ap"]["omega"] == pytest.approx(1.45, rel=0.02)


def test_detect_on_straight_shaft_finds_no_offset(tmp_path, write_config, capsys):
    config = write_config(small("straight", STRAIGHT, calibration="ground_truth"))
    assert cli.main(["detect", str(config), "--output-dir", str(tmp_path), "-q"]) == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    fields = dict(part.split("=") for part in line.split("\t") if "=" in part)
    assert abs(float(fields["offset_deg"])) <= 1.0
    assert float(fields["true_offset_deg"]) == 0.0
    assert (tmp_path / "straight" / "detect" / "shift.json").exists()
    assert (tmp_path / "straight" / "detect" / "ap_log.csv").exists()


def test_simulate_writes_one_trace(tmp_path, write_config, capsys):
    config = write_config(small("straight", STRAIGHT))
    assert cli.main(["simulate", str(config), "--controller", "none", "--output-dir", str(tmp_path), "-q"]) == 0
    assert (tmp_path / "straight" / "simulate" / "NoCompensation_trial0.csv").exists()
    assert "rmse_deg=" in capsys.readouterr().out


def test_report_summarises_and_renders_html(tmp_path, write_config, capsys):
    config = write_config(small("straight", STRAIGHT, calibration="ground_truth"),
                          small("bent_90", BENT_90, calibration="ground_truth"))
    assert cli.main(["run", str(config), "--output-dir", str(tmp_path), "-q"]) == 0
    capsys.readouterr()

    assert cli.main(["report", str(tmp_path), "--html", "-q"]) == 0
    table = capsys.readouterr().out
    assert "straight[ap]" in table and "bent_90[ap]" in table
    assert (tmp_path / "summary.csv").exists()
    assert (tmp_path / "bent_90" / "figures.html").exists()


# =============================================================================
# Exit Codes
# =============================================================================

def test_invalid_config_exits_with_2(tmp_path, write_config):
    config = write_config(small("x", STRAIGHT, trials=0))
    assert cli.main(["run", str(config), "--output-dir", str(tmp_path), "-q"]) == 2


def test_malformed_json_exits_with_2(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert cli.main(["run", str(path), "--output-dir", str(tmp_path), "-q"]) == 2


def test_unknown_scenario_exits_with_2(tmp_path, write_config):
    config = write_config(small("straight", STRAIGHT))
    assert cli.main(["detect", str(config), "--scenario", "nope", "--output-dir", str(tmp_path), "-q"]) == 2


def test_missing_file_exits_with_4(tmp_path):
    assert cli.main(["run", str(tmp_path / "missing.json"), "--output-dir", str(tmp_path), "-q"]) == 4


def test_empty_results_directory_exits_with_4(tmp_path):
    assert cli.main(["report", str(tmp_path / "nothing"), "-q"]) == 4


def test_detection_timeout_exits_with_3(tmp_path, write_config):
    config = write_config(small("bent_90", BENT_90, calibration="ground_truth", detector={"max_iterations": 1}))
    assert cli.main(["detect", str(config), "--output-dir", str(tmp_path), "-q"]) == 3
    assert (tmp_path / "bent_90" / "detect" / "ap_log.csv").exists()


def test_true_offset_of_bundled_quarter_bend(tmp_path, write_config, capsys):
    config = write_config(small("bent_90", BENT_90, calibration="ground_truth"))
    assert cli.main(["detect", str(config), "--output-dir", str(tmp_path), "-q"]) == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    fields = dict(part.split("=") for part in line.split("\t") if "=" in part)
    assert float(fields["true_offset_deg"]) == pytest.approx(9.0, abs=1e-3)
    assert float(fields["offset_deg"]) == pytest.approx(9.0, abs=2.0)
