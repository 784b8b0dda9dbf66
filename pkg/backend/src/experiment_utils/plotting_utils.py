"""
Plotting Utilities

Interactive Plotly views of recorded traces: tip angle over time and the
input/output hysteresis loop, one trace per controller.
"""

from pathlib import Path

import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from general_utils import get_logger, list_result_files, read_trace_file, write_text_atomic
from hysteresis_utils import Axis

logger = get_logger("plotting")

TEMPLATE = "plotly_dark"


def trace_figure(traces: dict[str, pd.DataFrame], axis: Axis, title: str = "") -> go.Figure:
    """Two panels for one axis: output vs time and output vs desired input."""
    axis = Axis(axis)
    fig = make_subplots(rows=1, cols=2, subplot_titles=("Tip angle over time", "Input vs output"))
    desired_drawn = False
    for name, df in traces.items():
        rows = df[df["axis"] == axis.value]
        if rows.empty:
            continue
        if not desired_drawn:
            fig.add_trace(go.Scatter(x=rows["t"], y=rows["q_desired"], name="desired",
                                     line={"dash": "dash"}), row=1, col=1)
            desired_drawn = True
        fig.add_trace(go.Scatter(x=rows["t"], y=rows["y_true"], name=name, legendgroup=name), row=1, col=1)
        fig.add_trace(go.Scatter(x=rows["q_desired"], y=rows["y_true"], name=name, legendgroup=name,
                                 showlegend=False), row=1, col=2)
    fig.update_xaxes(title_text="t (s)", row=1, col=1)
    fig.update_xaxes(title_text="desired (deg)", row=1, col=2)
    fig.update_yaxes(title_text="output (deg)")
    fig.update_layout(title=title or f"Axis {axis.value}", template=TEMPLATE)
    return fig


def figure_to_html(fig: go.Figure, full_html: bool = True) -> str:
    return fig.to_html(include_plotlyjs="cdn", full_html=full_html)


def write_scenario_html(scenario_dir: Path, trial: int = 0) -> Path | None:
    """
    Render `figures.html` for a scenario directory from its trace CSVs.

    Returns:
        Path of the written file, or None when the directory has no traces
    """
    scenario_dir = Path(scenario_dir)
    files = list_result_files(scenario_dir / "traces", f"*_trial{trial}.csv")
    if not files:
        logger.warning(f"No trial {trial} traces in {scenario_dir}")
        return None
    traces = {path.stem.rsplit("_trial", 1)[0]: read_trace_file(str(path)) for path in files}
    axes = sorted({a for df in traces.values() for a in df["axis"].unique()})
    parts = [figure_to_html(trace_figure(traces, Axis(a), f"{scenario_dir.name} [{a}]"), full_html=False)
             for a in axes]
    html = "<html><head><meta charset=\"utf-8\"></head><body>\n" + "\n".join(parts) + "\n</body></html>\n"
    path = write_text_atomic(scenario_dir / "figures.html", html)
    logger.info(f"Figures written: {path}")
    return path
