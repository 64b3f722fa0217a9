"""Waypoint geometry for the dressing trajectory.

The end-effector follows a polyline through the arm waypoints; all motion
bookkeeping is done in arc length along that polyline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class WaypointLabel(Enum):
    HAND = "HAND"
    LWRS = "LWRS"
    LELB = "LELB"
    LSHO = "LSHO"


# Dressing order along the left arm.
LABEL_ORDER = (
    WaypointLabel.HAND,
    WaypointLabel.LWRS,
    WaypointLabel.LELB,
    WaypointLabel.LSHO,
)


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"non-finite component in {self!r}")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def lerp(self, other: "Vec3", frac: float) -> "Vec3":
        return self + (other - self).scaled(frac)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Waypoint:
    label: WaypointLabel
    position: Vec3


# Invented desk-scale arm; only the labels and their order are fixed.
DEFAULT_WAYPOINTS = (
    Waypoint(WaypointLabel.HAND, Vec3(0.0, 0.0, 0.0)),
    Waypoint(WaypointLabel.LWRS, Vec3(0.10, 0.0, 0.02)),
    Waypoint(WaypointLabel.LELB, Vec3(0.35, 0.0, 0.10)),
    Waypoint(WaypointLabel.LSHO, Vec3(0.60, 0.0, 0.25)),
)


class Trajectory:
    """Ordered waypoint polyline with arc-length lookups.

    Waypoints must be unique and appear in dressing order
    (HAND -> LWRS -> LELB -> LSHO).
    """

    def __init__(self, waypoints: tuple[Waypoint, ...] | list[Waypoint]):
        wps = tuple(waypoints)
        if len(wps) < 2:
            raise ValueError("trajectory needs at least two waypoints")
        labels = [w.label for w in wps]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate waypoint labels")
        order = [LABEL_ORDER.index(lbl) for lbl in labels]
        if order != sorted(order):
            raise ValueError(f"waypoints out of dressing order: {labels}")
        self.waypoints = wps
        # Cumulative arc length at each waypoint, starting at 0.
        arcs = [0.0]
        for a, b in zip(wps, wps[1:]):
            seg = a.position.distance_to(b.position)
            if seg <= 0.0:
                raise ValueError("zero-length trajectory segment")
            arcs.append(arcs[-1] + seg)
        self._arcs = arcs

    @property
    def total_length(self) -> float:
        return self._arcs[-1]

    def waypoint_arc(self, index: int) -> float:
        return self._arcs[index]

    def segment_length(self, index: int) -> float:
        """Length of the segment leaving waypoint ``index``."""
        return self._arcs[index + 1] - self._arcs[index]

    def label_index(self, label: WaypointLabel) -> int:
        for i, w in enumerate(self.waypoints):
            if w.label == label:
                return i
        raise KeyError(label.value)

    def arc_of(self, label: WaypointLabel, progress: float) -> float:
        """Arc position at ``progress`` into the segment leaving ``label``.

        For the final waypoint only progress 0 is meaningful; larger values
        land beyond the trajectory end (an unreachable trigger).
        """
        i = self.label_index(label)
        if i == len(self.waypoints) - 1:
            return self._arcs[i] + progress
        return self._arcs[i] + progress * self.segment_length(i)

    def locate(self, arc: float) -> tuple[int, float]:
        """Map an arc position to (target waypoint index, segment progress)."""
        arc = max(0.0, min(arc, self.total_length))
        for i in range(1, len(self._arcs)):
            if arc <= self._arcs[i]:
                seg = self._arcs[i] - self._arcs[i - 1]
                return i, (arc - self._arcs[i - 1]) / seg
        return len(self._arcs) - 1, 1.0

    def point_at(self, arc: float) -> Vec3:
        arc = max(0.0, min(arc, self.total_length))
        idx, frac = self.locate(arc)
        return self.waypoints[idx - 1].position.lerp(self.waypoints[idx].position, frac)
