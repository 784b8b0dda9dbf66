"""
Identification

Hysteresis parameters from a calibration sweep (triangle knob motion on the
straight shaft, current and tip angle recorded).

- D_pos / D_neg: edges of the current plateau, found where the current slope
  leaves the plateau noise band while moving away from the valley.
- omega: one slope shared by the four engaged lines (L2, L4, L6, L8), fitted
  jointly with one intercept per line.
- B_pos / B_neg: horizontal distance between the ascending and descending
  lines on each side.
- H_pos / H_neg: intercepts of L4 and L8 evaluated at their boundaries.
"""

import math

import numpy as np
import pandas as pd

from general_utils import get_logger
from .dsp import FilterSpec, gradient, zero_phase_filter
from .errors import IdentificationError
from .hysteresis_core import DEFAULT_OMEGA, HysteresisParams, derive_params
from .plant_sim import Axis

logger = get_logger("identification")

PLATEAU_QUANTILE = 0.10
MAD_SCALE = 1.4826
SLOPE_TOLERANCE = 0.05


def _passes(q: np.ndarray) -> list[tuple[int, int, int]]:
    """Monotone runs (start, stop, direction) of a sampled sweep."""
    v = np.sign(np.diff(q))
    runs = []
    start = 0
    for i in range(1, len(v)):
        if v[i] != v[start]:
            runs.append((start, i + 1, int(v[start])))
            start = i
    runs.append((start, len(v) + 1, int(v[start])))
    return [r for r in runs if r[2] != 0]


def _edge_threshold(g: np.ndarray, current: np.ndarray) -> float:
    plateau = np.abs(g[current <= np.quantile(current, PLATEAU_QUANTILE)])
    median = float(np.median(plateau))
    mad = float(np.median(np.abs(plateau - median)))
    return max(median + 6.0 * MAD_SCALE * mad, 1e-3 * float(np.max(np.abs(g))))


def find_dead_zone_edges(q: np.ndarray, current: np.ndarray) -> tuple[float, float]:
    """
    (D_pos, D_neg) in the units of q, averaged over all sweep passes.

    The edge is the last sample before the first one on the far side of the
    valley whose slope exceeds the plateau threshold.

    Raises:
        IdentificationError: If an edge is never observed
    """
    g, _, _ = gradient(q, current, window=2)
    center = float(q[int(np.argmin(current))])
    threshold = _edge_threshold(g, current)
    if not threshold > 0:
        raise IdentificationError("Current is flat over the whole sweep; no dead-zone edge")
    logger.debug(f"Edge threshold {threshold:.4g}, valley centre {math.degrees(center):.2f} deg")

    pos_edges, neg_edges = [], []
    for start, stop, direction in _passes(q):
        for i in range(max(start, 1), stop):
            beyond = q[i] > center if direction > 0 else q[i] < center
            if beyond and abs(g[i]) >= threshold:
                (pos_edges if direction > 0 else neg_edges).append(float(q[i - 1]))
                break

    missing = [name for name, edges in (("positive", pos_edges), ("negative", neg_edges)) if not edges]
    if missing:
        raise IdentificationError(f"Sweep trace has no {' and no '.join(missing)} dead-zone edge")
    return float(np.mean(pos_edges)), float(np.mean(neg_edges))


def _engaged_points(q: np.ndarray, y: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Indices in `mask` whose slopes on both sides match the group's median slope."""
    idx = np.flatnonzero(mask)
    idx = idx[(idx > 0) & (idx < len(q) - 1)]
    if idx.size < 2:
        return idx[:0]
    with np.errstate(divide="ignore", invalid="ignore"):
        left = (y[idx] - y[idx - 1]) / (q[idx] - q[idx - 1])
        right = (y[idx + 1] - y[idx]) / (q[idx + 1] - q[idx])
    finite = np.isfinite(left) & np.isfinite(right)
    if not finite.any():
        return idx[:0]
    median = float(np.median(np.concatenate([left[finite], right[finite]])))
    if median <= 0:
        return idx[:0]
    keep = finite & (np.abs(left - median) <= SLOPE_TOLERANCE * median) \
        & (np.abs(right - median) <= SLOPE_TOLERANCE * median)
    return idx[keep]


def fit_engaged_lines(q: np.ndarray, y: np.ndarray, d_pos: float, d_neg: float) -> tuple[float | None, dict[str, float]]:
    """
    Joint least squares y = omega*q + c_line over the engaged lines.

    Returns:
        (omega or None when under-determined, intercept per line name)
    """
    v = np.sign(np.gradient(q))
    groups = {
        "L4": (v > 0) & (q > d_pos),
        "L2": (v > 0) & (q < d_neg),
        "L6": (v < 0) & (q > d_pos),
        "L8": (v < 0) & (q < d_neg),
    }
    points = {name: _engaged_points(q, y, mask) for name, mask in groups.items()}
    points = {name: idx for name, idx in points.items() if idx.size >= 2}
    if not points:
        return None, {}

    names = list(points)
    rows = np.concatenate([points[n] for n in names])
    design = np.zeros((rows.size, 1 + len(names)))
    design[:, 0] = q[rows]
    offset = 0
    for j, name in enumerate(names):
        design[offset:offset + points[name].size, 1 + j] = 1.0
        offset += points[name].size
    coef, _, rank, _ = np.linalg.lstsq(design, y[rows], rcond=None)
    if rank < design.shape[1] or not coef[0] > 0:
        return None, {}
    logger.debug(f"Engaged points per line: { {n: int(points[n].size) for n in names} }")
    return float(coef[0]), {name: float(coef[1 + j]) for j, name in enumerate(names)}


def identify_params(trace: pd.DataFrame, axis: Axis = Axis.AP, filter_current: bool = True,
                    sample_rate: float | None = None) -> HysteresisParams:
    """
    Identify one axis from a sweep trace (trace CSV layout, angles in degrees).

    Args:
        trace: Trace rows; only rows of `axis` are used
        axis: Knob axis to identify
        filter_current: Zero-phase Butterworth smoothing of the current first
        sample_rate: Trace sample rate (Hz); inferred from `t` when omitted

    Raises:
        IdentificationError: Empty trace or a missing plateau edge
    """
    axis = Axis(axis)
    rows = trace[trace["axis"] == axis.value] if "axis" in trace.columns else trace
    if len(rows) < 4:
        raise IdentificationError(f"Trace has {len(rows)} samples for axis {axis.value}; a sweep is required")
    logger.info(f"=== Identifying axis {axis.value} from {len(rows)} samples ===")

    q = np.radians(rows["q_commanded"].to_numpy(dtype=float))
    y = np.radians(rows["y_true"].to_numpy(dtype=float))
    current = rows["current"].to_numpy(dtype=float)

    if filter_current:
        if sample_rate is None:
            t = rows["t"].to_numpy(dtype=float)
            sample_rate = 1.0 / float(np.median(np.diff(t)))
        current = zero_phase_filter(FilterSpec(sample_rate_hz=sample_rate), current)

    d_pos, d_neg = find_dead_zone_edges(q, current)
    if not d_neg < d_pos:
        raise IdentificationError(
            f"Edges out of order: D_neg={math.degrees(d_neg):.2f} deg >= D_pos={math.degrees(d_pos):.2f} deg"
        )

    omega, c = fit_engaged_lines(q, y, d_pos, d_neg)
    if omega is None:
        logger.warning(f"Slope fit under-determined; using omega={DEFAULT_OMEGA} and zero backlash")
        omega, c = DEFAULT_OMEGA, {}

    b_pos = (c["L6"] - c["L4"]) / omega if {"L4", "L6"} <= c.keys() else 0.0
    b_neg = (c["L8"] - c["L2"]) / omega if {"L2", "L8"} <= c.keys() else 0.0
    if {"L4", "L6"} - c.keys() or {"L2", "L8"} - c.keys():
        logger.warning(f"Missing engaged lines {sorted({'L2', 'L4', 'L6', 'L8'} - c.keys())}; backlash set to 0 there")
    h_pos = c["L4"] + omega * d_pos if "L4" in c else 0.0
    h_neg = c["L8"] + omega * d_neg if "L8" in c else 0.0
    if h_neg > h_pos:
        # equal heights up to fit noise
        h_pos = h_neg = 0.5 * (h_pos + h_neg)

    params = derive_params(
        d_pos=d_pos, d_neg=d_neg, b_pos=max(b_pos, 0.0), b_neg=max(b_neg, 0.0),
        omega=omega, h_pos=h_pos, h_neg=h_neg,
        x_ref_pos=float(np.max(q)), x_ref_neg=float(np.min(q)),
    )
    logger.info(
        f"Identified {axis.value}: D=({math.degrees(d_pos):.2f}, {math.degrees(d_neg):.2f}) deg, "
        f"B=({math.degrees(params.b_pos):.2f}, {math.degrees(params.b_neg):.2f}) deg, omega={omega:.4f}"
    )
    return params
