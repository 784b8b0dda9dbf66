"""
Shaft Geometry

Tendon length bookkeeping for a proximal shaft described as a chain of
constant-curvature segments, and the knob angles the shape consumes.

Conventions (body frame of the catheter):
- theta = 0 bends towards the anterior tendon, theta = +pi/2 towards the right one.
- Angles in radians, lengths in mm.
- Straight segments have alpha = 0 and an explicit arc_length; r is unused.
"""

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

from general_utils import get_logger
from .errors import GeometryError

logger = get_logger("shaft_geometry")

ARC_TOLERANCE_MM = 1e-9


# =============================================================================
# Domain Types
# =============================================================================

@dataclass(frozen=True)
class ShaftSegment:
    """One constant-curvature piece S_i = (r, alpha, theta) with centerline length L_i."""
    arc_length: float
    alpha: float = 0.0
    theta: float = 0.0
    r: float | None = None

    def __post_init__(self):
        _validate_segment(self)

    @classmethod
    def curved(cls, r: float, alpha: float, theta: float = 0.0) -> "ShaftSegment":
        """Curved segment; arc_length is r * alpha."""
        if r is None or r <= 0:
            raise GeometryError(f"Curvature radius must be > 0, got {r}")
        return cls(arc_length=r * alpha, alpha=alpha, theta=theta, r=r)

    @classmethod
    def straight(cls, length: float, theta: float = 0.0) -> "ShaftSegment":
        return cls(arc_length=length, alpha=0.0, theta=theta, r=None)

    @property
    def is_straight(self) -> bool:
        return self.alpha == 0.0


@dataclass(frozen=True)
class ShaftShape:
    """Ordered shaft segments plus tendon offset and knob radius (mm)."""
    segments: tuple[ShaftSegment, ...]
    beta_catheter: float = 1.0
    beta_knob: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if len(self.segments) < 1:
            raise GeometryError("A shaft shape needs at least one segment")
        for seg in self.segments:
            _validate_segment(seg)
        if not self.beta_catheter > 0:
            raise GeometryError(f"beta_catheter must be > 0, got {self.beta_catheter}")
        if not self.beta_knob > 0:
            raise GeometryError(f"beta_knob must be > 0, got {self.beta_knob}")

    @property
    def length(self) -> float:
        """L_shaft, the sum of segment centerline lengths."""
        return math.fsum(seg.arc_length for seg in self.segments)

    @property
    def is_straight(self) -> bool:
        return all(seg.is_straight for seg in self.segments)


class TendonLengths(NamedTuple):
    """Anterior, posterior, right and left tendon lengths (mm)."""
    a: float
    p: float
    r: float
    l: float


class TendonDeltas(NamedTuple):
    """Pulled-length deltas (mm). dP == -dA and dL == -dR."""
    dA: float
    dP: float
    dR: float
    dL: float


class KnobOffset(NamedTuple):
    """Knob angles (rad) consumed by the shaft shape: phi1 (AP), phi2 (LR)."""
    phi1: float
    phi2: float


def _validate_segment(seg: ShaftSegment) -> None:
    if not seg.alpha >= 0:
        raise GeometryError(f"Segment curvature angle must be >= 0, got {seg.alpha}")
    if not seg.arc_length > 0:
        raise GeometryError(f"Segment arc length must be > 0, got {seg.arc_length}")
    if seg.alpha > 0:
        if seg.r is None or not seg.r > 0:
            raise GeometryError(f"Curved segment needs a radius > 0, got {seg.r}")
        if abs(seg.arc_length - seg.r * seg.alpha) >= ARC_TOLERANCE_MM:
            raise GeometryError(
                f"Arc length {seg.arc_length} mm does not match r*alpha = {seg.r * seg.alpha} mm"
            )


# =============================================================================
# Operations
# =============================================================================

def segment_tendon_lengths(seg: ShaftSegment, beta_catheter: float) -> TendonLengths:
    """
    Tendon lengths along one segment.

    L_A = L - a*b*cos(theta), L_P = L + a*b*cos(theta),
    L_R = L - a*b*sin(theta), L_L = L + a*b*sin(theta).
    """
    _validate_segment(seg)
    if not beta_catheter > 0:
        raise GeometryError(f"beta_catheter must be > 0, got {beta_catheter}")
    ab = seg.alpha * beta_catheter
    ca = ab * math.cos(seg.theta)
    sa = ab * math.sin(seg.theta)
    L = seg.arc_length
    return TendonLengths(a=L - ca, p=L + ca, r=L - sa, l=L + sa)


def total_tendon_lengths(shape: ShaftShape) -> TendonLengths:
    """Component-wise sums of segment_tendon_lengths over the shaft."""
    parts = [segment_tendon_lengths(seg, shape.beta_catheter) for seg in shape.segments]
    return TendonLengths(
        a=math.fsum(p.a for p in parts),
        p=math.fsum(p.p for p in parts),
        r=math.fsum(p.r for p in parts),
        l=math.fsum(p.l for p in parts),
    )


def total_deltas(shape: ShaftShape) -> TendonDeltas:
    """Pulled length of each tendon caused by the shaft curvature."""
    dA = math.fsum(seg.alpha * shape.beta_catheter * math.cos(seg.theta) for seg in shape.segments)
    dR = math.fsum(seg.alpha * shape.beta_catheter * math.sin(seg.theta) for seg in shape.segments)
    # antagonistic pairs
    return TendonDeltas(dA=dA, dP=-dA, dR=dR, dL=-dR)


def knob_offset(shape: ShaftShape) -> KnobOffset:
    """Knob angles (rad) taken up by the shaft before the bending section moves."""
    if not shape.beta_knob > 0:
        raise GeometryError(f"beta_knob must be > 0, got {shape.beta_knob}")
    deltas = total_deltas(shape)
    offset = KnobOffset(phi1=deltas.dA / shape.beta_knob, phi2=deltas.dR / shape.beta_knob)
    logger.debug(
        f"Knob offset for {len(shape.segments)} segments: "
        f"phi1={math.degrees(offset.phi1):.3f} deg, phi2={math.degrees(offset.phi2):.3f} deg"
    )
    return offset


# =============================================================================
# Shape Helpers
# =============================================================================

def straight_shaft(length: float = 1000.0, beta_catheter: float = 1.0, beta_knob: float = 10.0) -> ShaftShape:
    return ShaftShape(
        segments=(ShaftSegment.straight(length),),
        beta_catheter=beta_catheter,
        beta_knob=beta_knob,
    )


def rotate_shape(shape: ShaftShape, dtheta: float) -> ShaftShape:
    """Same shape with every segment's roll angle advanced by dtheta."""
    return replace(
        shape,
        segments=tuple(replace(seg, theta=seg.theta + dtheta) for seg in shape.segments),
    )


def split_segment(seg: ShaftSegment, fractions: Sequence[float]) -> tuple[ShaftSegment, ...]:
    """
    Split a segment into pieces with identical (r, theta).

    `fractions` are positive weights; each piece gets its share of alpha
    (curved) or arc length (straight).
    """
    total = math.fsum(fractions)
    if total <= 0 or any(f <= 0 for f in fractions):
        raise GeometryError("Split fractions must be positive")
    if seg.is_straight:
        return tuple(ShaftSegment.straight(seg.arc_length * f / total, seg.theta) for f in fractions)
    return tuple(ShaftSegment.curved(seg.r, seg.alpha * f / total, seg.theta) for f in fractions)
