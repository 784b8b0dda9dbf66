from .config import (
    SegmentSpec,
    ShapeSpec,
    ParamsSpec,
    PlantSpec,
    DetectorSpec,
    ControllerSpec,
    InputSpec,
    ScenarioSpec,
    ExperimentConfig,
    load_config,
    dump_config,
)
from .inputs import gen_input, calibration_sweep, time_axis
from .metrics import ptpe, rmse, improvement_rate, error_series, mean_std
from .reporting import (
    REPORT_COLUMNS,
    build_report,
    format_table,
    write_report,
    write_figure_data,
    collect_reports,
    summarize_results,
)
from .runner import (
    CellResult,
    ScenarioResult,
    true_params,
    calibrate,
    run_cell,
    run_scenario,
    run_experiment,
)
from .plotting_utils import trace_figure, figure_to_html, write_scenario_html

__all__ = [
    # Configuration
    "SegmentSpec",
    "ShapeSpec",
    "ParamsSpec",
    "PlantSpec",
    "DetectorSpec",
    "ControllerSpec",
    "InputSpec",
    "ScenarioSpec",
    "ExperimentConfig",
    "load_config",
    "dump_config",
    # Inputs
    "gen_input",
    "calibration_sweep",
    "time_axis",
    # Metrics
    "ptpe",
    "rmse",
    "improvement_rate",
    "error_series",
    "mean_std",
    # Reporting
    "REPORT_COLUMNS",
    "build_report",
    "format_table",
    "write_report",
    "write_figure_data",
    "collect_reports",
    "summarize_results",
    # Runner
    "CellResult",
    "ScenarioResult",
    "true_params",
    "calibrate",
    "run_cell",
    "run_scenario",
    "run_experiment",
    # Plotting
    "trace_figure",
    "figure_to_html",
    "write_scenario_html",
]
