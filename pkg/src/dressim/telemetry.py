"""Append-only trial event recording, plain-text log dialects, summaries.

A single canonical event stream feeds two renderers: the human-intervention
dialect and the autonomous dialect differ in phrasing and numeric precision,
so both are first-class. Events are immutable and time-ordered; exports
round-trip losslessly through JSONL.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Iterable


class EventKind(Enum):
    POTENTIAL_SNAG_DETECTED = "PotentialSnagDetected"
    CROSS35 = "Cross35"
    ROBOT_STOPPED = "RobotStopped"
    COMPLIANCE_ENTERED = "ComplianceEntered"
    RECOVERY_ENTERED = "RecoveryEntered"
    TRAJECTORY_MODE_ENTERED = "TrajectoryModeEntered"
    SNAG_RESOLVED = "SnagResolved"
    USER_PROMPTED = "UserPrompted"
    USER_RESPONDED = "UserResponded"
    SPEED_REDUCED = "SpeedReduced"
    PAIN_REPORTED = "PainReported"
    GRIPPER_OPENED = "GripperOpened"
    MOVED_TO_SAFE = "MovedToSafe"
    MOVED_HOME = "MovedHome"
    EMERGENCY_STOP = "EmergencyStop"
    TRIAL_ABORTED = "TrialAborted"
    TRIAL_COMPLETED = "TrialCompleted"
    WAYPOINT_REACHED = "WaypointReached"


class Dialect(Enum):
    HUMAN_INTERVENTION = "human"
    AUTONOMOUS = "auto"


@dataclass(frozen=True)
class ControlEvent:
    t: float
    kind: EventKind
    force: float | None = None
    data: dict = field(default_factory=dict)


SCHEMA_VERSION = 1


class EventLog:
    """Append-only, time-ordered event history for one trial."""

    def __init__(self, epoch: datetime | None = None):
        self.epoch = epoch or datetime(2024, 3, 27, 10, 35, 0)
        self._events: list[ControlEvent] = []

    def record(self, event: ControlEvent) -> None:
        if self._events and event.t < self._events[-1].t:
            raise ValueError(
                f"time regression: {event.t} < {self._events[-1].t} ({event.kind.value})"
            )
        self._events.append(event)

    @property
    def events(self) -> tuple[ControlEvent, ...]:
        return tuple(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def timestamp(self, t: float) -> datetime:
        return self.epoch + timedelta(seconds=t)


# ----------------------------------------------------------------------
# dialect rendering


def _ts_auto(log: EventLog, t: float) -> str:
    return log.timestamp(t).strftime("%Y-%m-%d %H:%M:%S.%f")


def _ts_human(log: EventLog, t: float) -> str:
    return log.timestamp(t).strftime("%H:%M:%S.%f")


def _durations_text(durations: list[float]) -> str:
    return "[" + ", ".join(f"{d:.9f}" for d in durations) + "]"


def render_log(log: EventLog, dialect: Dialect) -> str:
    if dialect == Dialect.AUTONOMOUS:
        return _render_autonomous(log)
    if dialect == Dialect.HUMAN_INTERVENTION:
        return _render_human(log)
    raise ValueError(f"unknown dialect {dialect}")


def _render_autonomous(log: EventLog) -> str:
    lines: list[str] = []
    durations: list[float] = []
    for ev in log.events:
        ts = _ts_auto(log, ev.t)
        kind = ev.kind
        if kind == EventKind.POTENTIAL_SNAG_DETECTED:
            if lines:
                lines.append("")
            lines.append(f"Potential Snag. Detected 15N at: {ts} with force: {ev.force}")
        elif kind == EventKind.CROSS35:
            lines.append(f"35N crossed at: {ts} with force: {ev.force}")
        elif kind == EventKind.ROBOT_STOPPED:
            lines.append(f"Robot stopped at: {ts}")
        elif kind == EventKind.COMPLIANCE_ENTERED:
            lines.append(f"Switched to compliance mode at: {ts}")
        elif kind == EventKind.RECOVERY_ENTERED:
            lines.append(f"Switched back to recovery mode at: {ts}")
        elif kind == EventKind.SNAG_RESOLVED:
            durations.append(ev.data["duration"])
            lines.append(f"Snag recovered at: {ts} with force: {ev.force}")
            lines.append(f"with recovery duration: {_durations_text(durations)}")
        elif kind == EventKind.GRIPPER_OPENED:
            lines.append(f"Time crossed 40 seconds. Gripper opened at: {ts}")
        elif kind == EventKind.MOVED_TO_SAFE:
            lines.append(f"Robot started moving to safe position at: {ts}")
        elif kind == EventKind.MOVED_HOME:
            lines.append(f"Robot started moving to final home position at: {ts}")
        else:
            lines.append(f"# {kind.value} at: {ts}")
    return "\n".join(lines) + ("\n" if lines else "")


def _render_human(log: EventLog) -> str:
    lines: list[str] = []
    for ev in log.events:
        ts = _ts_human(log, ev.t)
        kind = ev.kind
        if kind == EventKind.POTENTIAL_SNAG_DETECTED:
            lines.append(f"Potential Snag Detected at: {ts} | Force: {ev.force:.5f}N")
        elif kind == EventKind.CROSS35:
            lines.append(f"35N crossed at: {ts} | Force: {ev.force:.4f}N")
        elif kind == EventKind.ROBOT_STOPPED:
            lines.append(f"Robot Paused at: {ts}")
        elif kind == EventKind.COMPLIANCE_ENTERED:
            lines.append(f"Switched to Compliance Mode at: {ts}")
        elif kind == EventKind.USER_PROMPTED:
            lines.append(f'User Prompt: "{ev.data["text"]}"')
        elif kind == EventKind.USER_RESPONDED:
            if ev.data.get("intent") == "confirm_fixed":
                lines.append("Fixed Snag. Resume Dressing.")
            else:
                lines.append(f'User Response: "{ev.data["text"]}"')
        elif kind == EventKind.TRAJECTORY_MODE_ENTERED:
            lines.append(f"Switched back to Trajectory Mode at: {ts}")
        elif kind == EventKind.SNAG_RESOLVED:
            lines.append(f"Snag Resolved at: {ts} | Force: {ev.force:.4f}N")
            lines.append(f"Recovery Duration: {ev.data['duration']:.4f}s")
        elif kind == EventKind.RECOVERY_ENTERED:
            lines.append(f"Switched to Recovery Mode at: {ts}")
        elif kind == EventKind.GRIPPER_OPENED:
            lines.append(f"Gripper opened at: {ts}")
        elif kind == EventKind.MOVED_TO_SAFE:
            lines.append(f"Robot started moving to safe position at: {ts}")
        elif kind == EventKind.MOVED_HOME:
            lines.append(f"Robot started moving to final home position at: {ts}")
        else:
            lines.append(f"# {kind.value} at: {ts}")
    return "\n".join(lines) + ("\n" if lines else "")


# ----------------------------------------------------------------------
# JSONL / CSV export


def export_jsonl(log: EventLog) -> bytes:
    out = io.StringIO()
    header = {"v": SCHEMA_VERSION, "epoch": log.epoch.isoformat()}
    out.write(json.dumps(header, sort_keys=True) + "\n")
    for ev in log.events:
        row = {"t": ev.t, "kind": ev.kind.value, "force": ev.force, "data": ev.data}
        out.write(json.dumps(row, sort_keys=True) + "\n")
    return out.getvalue().encode()


def import_jsonl(payload: bytes) -> EventLog:
    lines = payload.decode().splitlines()
    if not lines:
        raise ValueError("empty JSONL payload")
    header = json.loads(lines[0])
    if header.get("v") != SCHEMA_VERSION:
        raise ValueError(f"unsupported event schema version {header.get('v')}")
    log = EventLog(epoch=datetime.fromisoformat(header["epoch"]))
    for line in lines[1:]:
        row = json.loads(line)
        log.record(
            ControlEvent(
                t=row["t"],
                kind=EventKind(row["kind"]),
                force=row["force"],
                data=row["data"],
            )
        )
    return log


SUMMARY_CSV_HEADER = [
    "Trials",
    "Snags",
    "Pot. Snags",
    "Esc. Snags",
    "Resolved",
    "Aborts",
    "Attempts",
    "Force (N)",
    "Time (s)",
]

BREAKDOWN_CSV_HEADER = ["Breakdown", "Count", "Force (N)", "Time (s)"]


@dataclass
class CategoryStats:
    count: int = 0
    force_min: float | None = None
    force_max: float | None = None
    time_min: float | None = None
    time_max: float | None = None

    def add(self, peak: float | None, duration: float | None) -> None:
        self.count += 1
        if peak is not None:
            self.force_min = peak if self.force_min is None else min(self.force_min, peak)
            self.force_max = peak if self.force_max is None else max(self.force_max, peak)
        if duration is not None:
            self.time_min = duration if self.time_min is None else min(self.time_min, duration)
            self.time_max = duration if self.time_max is None else max(self.time_max, duration)

    def merge(self, other: "CategoryStats") -> None:
        self.count += other.count
        for attr, pick in (
            ("force_min", min),
            ("force_max", max),
            ("time_min", min),
            ("time_max", max),
        ):
            a, b = getattr(self, attr), getattr(other, attr)
            if b is not None:
                setattr(self, attr, b if a is None else pick(a, b))

    def range_text(self, attr: str) -> str:
        lo, hi = getattr(self, f"{attr}_min"), getattr(self, f"{attr}_max")
        if lo is None:
            return "-"
        return f"{lo:.2f}-{hi:.2f}"


@dataclass
class TrialSummary:
    """Aggregates over one or more completed trials."""

    trials: int = 0
    snags: int = 0
    potential_snags: int = 0
    escalated_snags: int = 0
    resolved: int = 0
    aborts: int = 0
    attempts: int = 0
    force_range: tuple[float, float] | None = None
    time_range: tuple[float, float] | None = None
    pauses: dict[str, int] = field(
        default_factory=lambda: {"trajectory": 0, "pain": 0, "speed_check": 0}
    )
    waypoint_reached: str | None = None
    status: str | None = None
    breakdown: dict[str, CategoryStats] = field(
        default_factory=lambda: {
            "potential": CategoryStats(),
            "escalated_resolved": CategoryStats(),
            "aborted": CategoryStats(),
        }
    )

    def merge(self, other: "TrialSummary") -> "TrialSummary":
        self.trials += other.trials
        self.snags += other.snags
        self.potential_snags += other.potential_snags
        self.escalated_snags += other.escalated_snags
        self.resolved += other.resolved
        self.aborts += other.aborts
        self.attempts += other.attempts
        for key in self.pauses:
            self.pauses[key] += other.pauses[key]
        for key in self.breakdown:
            self.breakdown[key].merge(other.breakdown[key])
        self.force_range = _merge_range(self.force_range, other.force_range)
        self.time_range = _merge_range(self.time_range, other.time_range)
        self.waypoint_reached = other.waypoint_reached or self.waypoint_reached
        self.status = other.status or self.status
        return self


def _merge_range(
    a: tuple[float, float] | None, b: tuple[float, float] | None
) -> tuple[float, float] | None:
    if a is None:
        return b
    if b is None:
        return a
    return (min(a[0], b[0]), max(a[1], b[1]))


TERMINAL_KINDS = {
    EventKind.TRIAL_COMPLETED: "Completed",
    EventKind.TRIAL_ABORTED: "Aborted",
    EventKind.EMERGENCY_STOP: "EmergencyStop",
}


def summarize(logs: Iterable[EventLog]) -> TrialSummary:
    """Single-pass fold over trial logs into Table-style aggregates."""
    from .control import episode_tracker  # cycle: control consumes telemetry events

    total = TrialSummary()
    for log in logs:
        events = log.events
        status = None
        for ev in reversed(events):
            if ev.kind in TERMINAL_KINDS:
                status = TERMINAL_KINDS[ev.kind]
                break
        if status is None:
            raise ValueError("unterminated trial log")
        summary = TrialSummary(trials=1, status=status)
        for ev in events:
            if ev.kind == EventKind.WAYPOINT_REACHED:
                summary.pauses["trajectory"] += 1
                summary.waypoint_reached = ev.data["label"]
            elif ev.kind == EventKind.PAIN_REPORTED:
                summary.pauses["pain"] += 1
            elif ev.kind == EventKind.USER_PROMPTED and ev.data.get("prompt_kind") == "speed_check":
                summary.pauses["speed_check"] += 1
        for episode in episode_tracker(events):
            summary.snags += 1
            duration = episode.duration
            if episode.cross35_t is None:
                summary.potential_snags += 1
                summary.breakdown["potential"].add(episode.peak_force, duration)
            else:
                summary.escalated_snags += 1
                if episode.outcome in ("ResolvedByUser", "ResolvedAutonomously"):
                    summary.resolved += 1
                    summary.breakdown["escalated_resolved"].add(episode.peak_force, duration)
                else:
                    summary.aborts += 1
                    summary.breakdown["aborted"].add(episode.peak_force, duration)
            summary.attempts += episode.attempts
            if episode.peak_force is not None:
                summary.force_range = _merge_range(
                    summary.force_range, (episode.peak_force, episode.peak_force)
                )
            if duration is not None:
                summary.time_range = _merge_range(summary.time_range, (duration, duration))
        total.merge(summary)
    return total


def export_summary_csv(summary: TrialSummary) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(SUMMARY_CSV_HEADER)
    force = "-" if summary.force_range is None else _fmt_range(summary.force_range)
    time_ = "-" if summary.time_range is None else _fmt_range(summary.time_range)
    writer.writerow(
        [
            summary.trials,
            summary.snags,
            summary.potential_snags,
            summary.escalated_snags,
            summary.resolved,
            summary.aborts,
            summary.attempts,
            force,
            time_,
        ]
    )
    writer.writerow([])
    writer.writerow(BREAKDOWN_CSV_HEADER)
    names = {
        "potential": "Potential Snags",
        "escalated_resolved": "Esc. Snags (Resolved)",
        "aborted": "Aborted Tasks",
    }
    for key, label in names.items():
        stats = summary.breakdown[key]
        writer.writerow(
            [label, stats.count, stats.range_text("force"), stats.range_text("time")]
        )
    return out.getvalue().encode()


def _fmt_range(rng: tuple[float, float]) -> str:
    return f"{rng[0]:.2f}-{rng[1]:.2f}"


def export(log_or_summary, fmt: str) -> bytes:
    """Uniform export entry point: jsonl | csv | text-human | text-auto."""
    if fmt == "jsonl":
        return export_jsonl(log_or_summary)
    if fmt == "csv":
        return export_summary_csv(log_or_summary)
    if fmt == "text-human":
        return render_log(log_or_summary, Dialect.HUMAN_INTERVENTION).encode()
    if fmt == "text-auto":
        return render_log(log_or_summary, Dialect.AUTONOMOUS).encode()
    raise ValueError(f"unknown export format {fmt!r}")
