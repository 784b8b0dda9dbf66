"""
Hysteresis Core

Piecewise-linear dead-zone + backlash model of one knob axis.

The eight linear pieces are organised as two envelopes:

    ascending  A(x): L2  w(x - d_hat_pos) + h_pos   for x <  d_hat_pos
                     L3  h_pos                      for d_hat_pos <= x <= d_pos
                     L4  w(x - d_pos) + h_pos       for x >  d_pos
    descending D(x): L6  w(x - d_hat_neg) + h_neg   for x >  d_hat_neg
                     L7  h_neg                      for d_neg <= x <= d_hat_neg
                     L8  w(x - d_neg) + h_neg       for x <  d_neg

and the output is held flat between them after a reversal (L1 while the input
rises, L5 while it falls). With reversals at the reference points the flats sit
at w(x_ref_neg - d_neg) + h_neg (L1) and w(x_ref_pos - d_pos) + h_pos (L5).

The update y_t = clamp(y_{t-1}, min(A, D)(x_t), max(A, D)(x_t)) depends on the
input and the previous output only, so the model is rate independent and
w-Lipschitz in x. Angles are radians.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from general_utils import get_logger
from .errors import ParameterError, SaturationError

logger = get_logger("hysteresis")

DEFAULT_OMEGA = 1.45
DEFAULT_X_REF = math.radians(40.0)
BRANCH_TOLERANCE = 1e-12


class Branch(str, Enum):
    L1 = "L1"  # ascending hold after a reversal
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"
    L5 = "L5"  # descending hold after a reversal
    L6 = "L6"
    L7 = "L7"
    L8 = "L8"


# =============================================================================
# Parameters
# =============================================================================

def opposite_boundaries(d_pos: float, d_neg: float, b_pos: float, b_neg: float,
                        omega: float, h_pos: float, h_neg: float) -> tuple[float, float]:
    """(d_hat_pos, d_hat_neg) from the four main parameters and the heights."""
    d_hat_pos = (h_pos - h_neg) / omega + d_neg + b_neg
    d_hat_neg = (h_neg - h_pos) / omega + d_pos - b_pos
    return d_hat_pos, d_hat_neg


@dataclass(frozen=True)
class HysteresisParams:
    """
    Model parameters (radians on the input axis, radians on the output axis).

    Build with derive_params(); the constructor re-checks the derived
    boundaries so every instance satisfies the opposite-boundary identities.
    """
    d_pos: float
    d_neg: float
    b_pos: float
    b_neg: float
    omega: float
    h_pos: float
    h_neg: float
    d_hat_pos: float
    d_hat_neg: float
    x_ref_pos: float
    y_ref_pos: float
    x_ref_neg: float
    y_ref_neg: float

    def __post_init__(self):
        values = [getattr(self, name) for name in self.__dataclass_fields__]
        if not all(math.isfinite(v) for v in values):
            raise ParameterError("Hysteresis parameters must be finite")
        if not self.omega > 0:
            raise ParameterError(f"omega must be > 0, got {self.omega}")
        if not self.d_neg < self.d_pos:
            raise ParameterError(f"d_neg ({self.d_neg}) must be < d_pos ({self.d_pos})")
        if self.b_pos < 0 or self.b_neg < 0:
            raise ParameterError(f"Backlash must be >= 0, got ({self.b_pos}, {self.b_neg})")
        if self.h_neg > self.h_pos:
            raise ParameterError(f"h_neg ({self.h_neg}) must be <= h_pos ({self.h_pos})")
        expected = opposite_boundaries(self.d_pos, self.d_neg, self.b_pos, self.b_neg,
                                       self.omega, self.h_pos, self.h_neg)
        if (self.d_hat_pos, self.d_hat_neg) != expected:
            raise ParameterError(
                f"Opposite boundaries {(self.d_hat_pos, self.d_hat_neg)} do not match {expected}"
            )

    # --- envelopes ---------------------------------------------------------

    def ascending(self, x):
        """A(x); accepts scalars or numpy arrays."""
        l2 = self.omega * (x - self.d_hat_pos) + self.h_pos
        l4 = self.omega * (x - self.d_pos) + self.h_pos
        return np.maximum(np.minimum(l2, self.h_pos), l4)

    def descending(self, x):
        """D(x); accepts scalars or numpy arrays."""
        l6 = self.omega * (x - self.d_hat_neg) + self.h_neg
        l8 = self.omega * (x - self.d_neg) + self.h_neg
        return np.minimum(np.maximum(l6, self.h_neg), l8)

    @property
    def center(self) -> float:
        """Middle of the dead zone on the input axis."""
        return 0.5 * (self.d_pos + self.d_neg)

    @property
    def is_loop_consistent(self) -> bool:
        """True when the ascending envelope never rises above the descending one."""
        return self.d_hat_pos <= self.d_pos and self.d_hat_neg >= self.d_neg

    # --- serialization -----------------------------------------------------

    def to_document(self) -> dict[str, float]:
        """Flat key-value document in degrees (omega stays dimensionless)."""
        doc = {f"{name}_deg": math.degrees(getattr(self, name))
               for name in self.__dataclass_fields__ if name != "omega"}
        doc["omega"] = self.omega
        return dict(sorted(doc.items()))

    @classmethod
    def from_document(cls, doc: dict) -> "HysteresisParams":
        """Inverse of to_document(); derived boundaries are recomputed."""
        try:
            rad = {key[:-4]: math.radians(float(value)) for key, value in doc.items() if key.endswith("_deg")}
            return derive_params(
                d_pos=rad["d_pos"], d_neg=rad["d_neg"],
                b_pos=rad["b_pos"], b_neg=rad["b_neg"],
                omega=float(doc.get("omega", DEFAULT_OMEGA)),
                h_pos=rad.get("h_pos", 0.0), h_neg=rad.get("h_neg", 0.0),
                x_ref_pos=rad.get("x_ref_pos", DEFAULT_X_REF),
                x_ref_neg=rad.get("x_ref_neg", -DEFAULT_X_REF),
                y_ref_pos=rad.get("y_ref_pos"), y_ref_neg=rad.get("y_ref_neg"),
            )
        except KeyError as e:
            raise ParameterError(f"Parameter document is missing {e.args[0]}_deg") from e


def derive_params(d_pos: float, d_neg: float, b_pos: float, b_neg: float,
                  omega: float = DEFAULT_OMEGA, h_pos: float = 0.0, h_neg: float = 0.0,
                  x_ref_pos: float = DEFAULT_X_REF, x_ref_neg: float = -DEFAULT_X_REF,
                  y_ref_pos: float | None = None, y_ref_neg: float | None = None) -> HysteresisParams:
    """
    Complete a parameter set from the main parameters.

    Reference outputs default to the engaged branches evaluated at the
    reference inputs (the turning points of the calibration sweep). Logs a
    warning when a backlash wider than the dead zone makes the envelopes cross.
    """
    if not omega > 0:
        raise ParameterError(f"omega must be > 0, got {omega}")
    if not d_neg < d_pos:
        raise ParameterError(f"d_neg ({d_neg}) must be < d_pos ({d_pos})")
    d_hat_pos, d_hat_neg = opposite_boundaries(d_pos, d_neg, b_pos, b_neg, omega, h_pos, h_neg)
    if y_ref_pos is None:
        y_ref_pos = omega * (x_ref_pos - d_pos) + h_pos
    if y_ref_neg is None:
        y_ref_neg = omega * (x_ref_neg - d_neg) + h_neg
    params = HysteresisParams(
        d_pos=d_pos, d_neg=d_neg, b_pos=b_pos, b_neg=b_neg, omega=omega,
        h_pos=h_pos, h_neg=h_neg, d_hat_pos=d_hat_pos, d_hat_neg=d_hat_neg,
        x_ref_pos=x_ref_pos, y_ref_pos=y_ref_pos, x_ref_neg=x_ref_neg, y_ref_neg=y_ref_neg,
    )
    if not params.is_loop_consistent:
        logger.warning(
            f"Envelopes cross: d_hat_pos={math.degrees(d_hat_pos):.3f} deg, "
            f"d_hat_neg={math.degrees(d_hat_neg):.3f} deg for dead zone "
            f"[{math.degrees(d_neg):.3f}, {math.degrees(d_pos):.3f}] deg"
        )
    return params


def params_from_degrees(d_pos: float, d_neg: float, b_pos: float, b_neg: float,
                        omega: float = DEFAULT_OMEGA, h_pos: float = 0.0, h_neg: float = 0.0,
                        x_ref: float = 40.0) -> HysteresisParams:
    """derive_params() with every angle given in degrees."""
    r = math.radians
    return derive_params(r(d_pos), r(d_neg), r(b_pos), r(b_neg), omega, r(h_pos), r(h_neg),
                         x_ref_pos=r(x_ref), x_ref_neg=-r(x_ref))


def shift_params(p: HysteresisParams, offset: float) -> HysteresisParams:
    """Translate every input-axis quantity by `offset`; output axis untouched."""
    if offset == 0.0:
        return p
    return derive_params(
        d_pos=p.d_pos + offset, d_neg=p.d_neg + offset,
        b_pos=p.b_pos, b_neg=p.b_neg, omega=p.omega, h_pos=p.h_pos, h_neg=p.h_neg,
        x_ref_pos=p.x_ref_pos + offset, x_ref_neg=p.x_ref_neg + offset,
        y_ref_pos=p.y_ref_pos, y_ref_neg=p.y_ref_neg,
    )


def jitter_params(p: HysteresisParams, rng: np.random.Generator, fraction: float) -> HysteresisParams:
    """Catheter-to-catheter variation: scale D and B by independent factors in [1-f, 1+f]."""
    if fraction <= 0:
        return p
    f = rng.uniform(1.0 - fraction, 1.0 + fraction, size=4)
    return derive_params(
        d_pos=p.d_pos * f[0], d_neg=p.d_neg * f[1], b_pos=p.b_pos * f[2], b_neg=p.b_neg * f[3],
        omega=p.omega, h_pos=p.h_pos, h_neg=p.h_neg, x_ref_pos=p.x_ref_pos, x_ref_neg=p.x_ref_neg,
    )


# =============================================================================
# State Machine
# =============================================================================

@dataclass(frozen=True, slots=True)
class HysteresisState:
    branch: Branch
    x_prev: float
    v_prev: int
    y_prev: float


def _sign(v: float) -> int:
    return int(v > 0) - int(v < 0)


def classify_branch(params: HysteresisParams, x: float, y: float, direction: int,
                    previous: Branch) -> Branch:
    """Name the piece of the loop the point (x, y) lies on when moving in `direction`."""
    if direction > 0:
        if abs(y - float(params.ascending(x))) <= BRANCH_TOLERANCE:
            if x < params.d_hat_pos:
                return Branch.L2
            return Branch.L3 if x <= params.d_pos else Branch.L4
        return Branch.L1
    if direction < 0:
        if abs(y - float(params.descending(x))) <= BRANCH_TOLERANCE:
            if x > params.d_hat_neg:
                return Branch.L6
            return Branch.L7 if x >= params.d_neg else Branch.L8
        return Branch.L5
    return previous


def _clamp_to_band(params: HysteresisParams, x: float, y: float) -> float:
    a = float(params.ascending(x))
    d = float(params.descending(x))
    return min(max(y, min(a, d)), max(a, d))


def initial_state(params: HysteresisParams, x0: float = 0.0, y0: float = 0.0) -> HysteresisState:
    """Power-on state: knob slack, output at y0 pulled into the admissible band."""
    y = _clamp_to_band(params, x0, y0)
    if abs(y - float(params.ascending(x0))) <= BRANCH_TOLERANCE and params.d_hat_pos <= x0 <= params.d_pos:
        branch = Branch.L3
    elif abs(y - float(params.descending(x0))) <= BRANCH_TOLERANCE and params.d_neg <= x0 <= params.d_hat_neg:
        branch = Branch.L7
    else:
        branch = classify_branch(params, x0, y, +1 if y > 0 else -1, Branch.L3)
    return HysteresisState(branch=branch, x_prev=x0, v_prev=0, y_prev=y)


def step(state: HysteresisState, params: HysteresisParams, x_t: float, dt: float) -> tuple[float, HysteresisState]:
    """
    Advance the model by one sample.

    Zero velocity keeps the branch and the output. dt only guards the
    sampling contract; the model itself is rate independent.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    v = _sign(x_t - state.x_prev)
    if v == 0:
        return state.y_prev, replace(state, x_prev=x_t)
    y = _clamp_to_band(params, x_t, state.y_prev)
    branch = classify_branch(params, x_t, y, v, state.branch)
    return y, HysteresisState(branch=branch, x_prev=x_t, v_prev=v, y_prev=y)


def simulate(params: HysteresisParams, x: np.ndarray, dt: float,
             state: HysteresisState | None = None) -> tuple[np.ndarray, HysteresisState]:
    """Run step() over an input series; returns outputs and the final state."""
    state = state or initial_state(params, float(x[0]) if len(x) else 0.0)
    y = np.empty(len(x))
    for i, x_t in enumerate(x):
        y[i], state = step(state, params, float(x_t), dt)
    return y, state


# =============================================================================
# Inverse
# =============================================================================

def inverse(params: HysteresisParams, state: HysteresisState, y_desired: float, direction: int,
            knob_limit: float | None = None) -> float:
    """
    Input that drives the model output to `y_desired` while moving in `direction`.

    Rising targets invert the ascending envelope, falling targets the
    descending one, so a direction change makes the command jump across the
    backlash (and the dead zone when the target crosses the dead-zone height).

    Raises:
        SaturationError: command beyond +/- knob_limit; carries the clamped command
    """
    if not math.isfinite(y_desired):
        raise ParameterError(f"Desired output must be finite, got {y_desired}")
    direction = _sign(direction) or state.v_prev or 1

    if direction == state.v_prev and abs(y_desired - state.y_prev) <= BRANCH_TOLERANCE:
        x = state.x_prev
    elif direction > 0:
        if y_desired > params.h_pos:
            x = (y_desired - params.h_pos) / params.omega + params.d_pos
        elif y_desired < params.h_pos:
            x = (y_desired - params.h_pos) / params.omega + params.d_hat_pos
        else:
            x = min(max(state.x_prev, params.d_hat_pos), params.d_pos)
    else:
        if y_desired < params.h_neg:
            x = (y_desired - params.h_neg) / params.omega + params.d_neg
        elif y_desired > params.h_neg:
            x = (y_desired - params.h_neg) / params.omega + params.d_hat_neg
        else:
            x = min(max(state.x_prev, params.d_neg), params.d_hat_neg)

    if knob_limit is not None and abs(x) > knob_limit:
        clamped = math.copysign(knob_limit, x)
        raise SaturationError(
            f"Command {math.degrees(x):.3f} deg exceeds knob limit {math.degrees(knob_limit):.3f} deg",
            clamped_command=clamped,
        )
    return x
