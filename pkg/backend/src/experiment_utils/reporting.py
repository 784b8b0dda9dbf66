"""
Reporting

Report tables (one row per scenario label, controller and metric), their text
rendering, gnuplot-ready figure data and the summary over a results tree.
"""

import io
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

from general_utils import (
    get_logger,
    list_result_files,
    read_tabular_file,
    write_csv_atomic,
    write_text_atomic,
)
from hysteresis_utils import Axis, ControllerKind
from .metrics import improvement_rate, mean_std

logger = get_logger("reporting")

REPORT_COLUMNS = [
    "scenario",
    "controller",
    "metric",
    "mean_deg",
    "std_deg",
    "improvement_vs_none_pct",
    "improvement_vs_only_pct",
]
METRICS = ("ptpe", "rmse")
NOT_APPLICABLE = "-"
FAILED = "failed"


def scenario_label(name: str, axis: Axis) -> str:
    return f"{name}[{Axis(axis).value}]"


def _number(value) -> float | None:
    try:
        v = float(value)
    except (TypeError, ValueError):
        return None
    return v if np.isfinite(v) else None


# =============================================================================
# Report Table
# =============================================================================

def build_report(name: str, axes: list[Axis], controllers: list[str],
                 values: Mapping[tuple[str, Axis, str], list[float]],
                 status: Mapping[str, str]) -> pd.DataFrame:
    """
    Aggregate per-trial metrics into report rows.

    Args:
        name: Scenario name
        axes: Axes the scenario drives (one label per axis)
        controllers: Controller names in report order
        values: (controller, axis, metric) -> per-trial values in degrees
        status: controller -> "ok", "failed" or "skipped"

    Returns:
        DataFrame with REPORT_COLUMNS; numbers formatted as text
    """
    rows = []
    for axis in axes:
        label = scenario_label(name, axis)
        means: dict[tuple[str, str], float] = {}
        for controller in controllers:
            for metric in METRICS:
                trial_values = values.get((controller, axis, metric), [])
                if status.get(controller) == "skipped":
                    mean = std = NOT_APPLICABLE
                elif not trial_values:
                    mean = std = FAILED
                else:
                    m, s = mean_std(trial_values)
                    means[(controller, metric)] = m
                    mean, std = f"{m:.4f}", f"{s:.4f}"
                rows.append({"scenario": label, "controller": controller, "metric": metric,
                             "mean_deg": mean, "std_deg": std,
                             "improvement_vs_none_pct": "", "improvement_vs_only_pct": ""})

        # improvements only against baselines that ran
        for row in rows:
            if row["scenario"] != label or (row["controller"], row["metric"]) not in means:
                continue
            ours = means[(row["controller"], row["metric"])]
            none = means.get((ControllerKind.NO_COMPENSATION.value, row["metric"]))
            only = means.get((ControllerKind.COMPENSATION_ONLY.value, row["metric"]))
            if row["controller"] != ControllerKind.NO_COMPENSATION.value and none and none > 0:
                row["improvement_vs_none_pct"] = f"{improvement_rate(none, ours):.2f}"
            if row["controller"] == ControllerKind.COMPENSATION_SHIFT.value and only and only > 0:
                row["improvement_vs_only_pct"] = f"{improvement_rate(only, ours):.2f}"

    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def format_table(report: pd.DataFrame) -> str:
    """Controllers as rows, (scenario, metric) as columns, cells 'mean +/- std'."""
    if report.empty:
        return "(no results)\n"

    def cell(row) -> str:
        mean, std = _number(row["mean_deg"]), _number(row["std_deg"])
        if mean is None:
            return str(row["mean_deg"])
        return f"{mean:.2f} +/- {std:.2f}" if std is not None else f"{mean:.2f}"

    df = report.assign(value=report.apply(cell, axis=1))
    table = df.pivot(index="controller", columns=["scenario", "metric"], values="value")
    order = [k.value for k in ControllerKind if k.value in table.index]
    order += [c for c in table.index if c not in order]
    table = table.reindex(order).fillna(NOT_APPLICABLE)
    return table.to_string() + "\n"


def write_report(report: pd.DataFrame, out_dir: Path, stem: str = "report") -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    csv_path = write_csv_atomic(report, out_dir / f"{stem}.csv")
    txt_path = write_text_atomic(out_dir / f"{stem}.txt", format_table(report))
    logger.info(f"Report written: {csv_path}")
    return csv_path, txt_path


# =============================================================================
# Figure Data
# =============================================================================

def _dat_text(columns: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    data = np.column_stack(list(columns.values()))
    np.savetxt(buf, data, fmt="%.9g", header=" ".join(columns), comments="# ")
    return buf.getvalue()


def write_figure_data(traces: Mapping[str, pd.DataFrame], axis: Axis, out_dir: Path) -> list[Path]:
    """
    Whitespace-separated panels for one axis (first trial of each controller):
    `<axis>_time.dat` (t, desired, outputs) and `<axis>_loop.dat` (desired, outputs).
    """
    axis = Axis(axis)
    frames = {name: df[df["axis"] == axis.value] for name, df in traces.items()}
    frames = {name: df for name, df in frames.items() if not df.empty}
    if not frames:
        return []
    reference = next(iter(frames.values()))
    t = reference["t"].to_numpy(dtype=float)
    q_desired = reference["q_desired"].to_numpy(dtype=float)
    outputs = {f"y_{name}": df["y_true"].to_numpy(dtype=float) for name, df in frames.items()}

    out_dir = Path(out_dir)
    time_path = write_text_atomic(out_dir / f"{axis.value}_time.dat",
                                  _dat_text({"t": t, "q_desired": q_desired, **outputs}))
    loop_path = write_text_atomic(out_dir / f"{axis.value}_loop.dat",
                                  _dat_text({"q_desired": q_desired, **outputs}))
    return [time_path, loop_path]


# =============================================================================
# Results Summary
# =============================================================================

def collect_reports(results_dir: Path) -> pd.DataFrame:
    """Concatenate every report.csv under `results_dir` (sorted by path)."""
    files = list_result_files(results_dir, "report.csv")
    if not files:
        raise FileNotFoundError(f"No report.csv found under {results_dir}")
    frames = [read_tabular_file(str(path), required_columns=REPORT_COLUMNS) for path in files]
    report = pd.concat(frames, ignore_index=True)[REPORT_COLUMNS]
    logger.info(f"Collected {len(files)} reports, {len(report)} rows")
    return report


def summarize_results(results_dir: Path) -> tuple[pd.DataFrame, str]:
    """Write summary.csv / summary.txt at the top of `results_dir`; returns (frame, table)."""
    report = collect_reports(results_dir)
    write_report(report, Path(results_dir), stem="summary")
    return report, format_table(report)
