"""Fixed-tick world model: end-effector motion, garment forces, snags.

One owner advances the world through :meth:`World.step` and
:meth:`World.apply`; everything handed to other components is an immutable
snapshot. With equal seeds and command sequences two worlds produce
bit-identical state and force streams.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from .geometry import DEFAULT_WAYPOINTS, Trajectory, Vec3, Waypoint, WaypointLabel


class CommandKind(Enum):
    ADVANCE = "advance"
    PAUSE = "pause"
    COMPLIANCE = "compliance"
    RETRACT = "retract"
    RESUME = "resume"
    SET_SPEED_SCALE = "set_speed_scale"
    OPEN_GRIPPER = "open_gripper"
    MOVE_SAFE = "move_safe"
    MOVE_HOME = "move_home"


@dataclass(frozen=True)
class RobotCommand:
    kind: CommandKind
    value: float | None = None

    @staticmethod
    def advance() -> "RobotCommand":
        return RobotCommand(CommandKind.ADVANCE)

    @staticmethod
    def pause() -> "RobotCommand":
        return RobotCommand(CommandKind.PAUSE)

    @staticmethod
    def compliance() -> "RobotCommand":
        return RobotCommand(CommandKind.COMPLIANCE)

    @staticmethod
    def retract(step_m: float) -> "RobotCommand":
        return RobotCommand(CommandKind.RETRACT, step_m)

    @staticmethod
    def resume() -> "RobotCommand":
        return RobotCommand(CommandKind.RESUME)

    @staticmethod
    def set_speed_scale(scale: float) -> "RobotCommand":
        return RobotCommand(CommandKind.SET_SPEED_SCALE, scale)

    @staticmethod
    def open_gripper() -> "RobotCommand":
        return RobotCommand(CommandKind.OPEN_GRIPPER)

    @staticmethod
    def move_safe() -> "RobotCommand":
        return RobotCommand(CommandKind.MOVE_SAFE)

    @staticmethod
    def move_home() -> "RobotCommand":
        return RobotCommand(CommandKind.MOVE_HOME)


@dataclass(frozen=True)
class ForceSample:
    t: float
    magnitude: float


@dataclass(frozen=True)
class PoseEstimate:
    t: float
    positions: dict[WaypointLabel, Vec3]


@dataclass(frozen=True)
class SnagSpec:
    """A garment obstruction placed on the trajectory.

    trigger: (segment start label, fractional progress) at which the garment
    catches while advancing. While engaged the force contribution follows the
    robot's motion: + ramp_slope per meter forward, - ramp_slope per meter of
    retreat, capped at hold_force, held when stopped.

    Release paths:
      * extent_m: light obstruction; slides free once the robot has advanced
        extent_m past the engagement point.
      * resolvable_by_assist: removed by a manual adjustment
        (:meth:`World.resolve_snag_by_assist`); assist_delay is how long the
        helping hand needs.
      * resolvable_by_retraction + release_after_retract: lets go this many
        seconds after the robot first starts easing the garment back.
    """

    id: str
    trigger: tuple[WaypointLabel, float]
    ramp_slope: float
    hold_force: float
    resolvable_by_retraction: bool = False
    resolvable_by_assist: bool = False
    assist_delay: float = 1.0
    release_after_retract: float | None = None
    extent_m: float | None = None

    def __post_init__(self) -> None:
        if self.ramp_slope <= 0:
            raise ValueError("ramp_slope must be positive")
        if not 0.0 <= self.trigger[1]:
            raise ValueError("trigger progress must be non-negative")
        if self.hold_force <= 0:
            raise ValueError("hold_force must be positive")


@dataclass
class SnagState:
    spec: SnagSpec
    trigger_arc: float
    engaged: bool = False
    released: bool = False
    contribution: float = 0.0
    anchor_arc: float = 0.0
    retreat_total: float = 0.0
    first_retract_t: float | None = None
    engaged_t: float | None = None


@dataclass(frozen=True)
class BaselineParams:
    """Friction model for nominal dressing: c0 + c1*|v| + uniform noise."""

    c0: float = 3.0
    c1: float = 2.0
    noise: float = 1.5


@dataclass(frozen=True)
class GarmentParams:
    """Snag force dynamics shared by all snags in a scenario."""

    relax_ratio: float = 0.5    # compliance relaxes toward relax_ratio * hold_force
    relax_tau: float = 0.3      # s, exponential relaxation in compliance
    release_tau: float = 0.15   # s, decay of a released snag's residual force


@dataclass(frozen=True)
class WorldConfig:
    seed: int = 0
    dt: float = 0.01
    base_speed: float = 0.05
    waypoints: tuple[Waypoint, ...] = ()
    baseline: BaselineParams = field(default_factory=BaselineParams)
    garment: GarmentParams = field(default_factory=GarmentParams)
    pose_noise: float = 0.0
    waypoint_dwell: float = 0.5
    safe_position: Vec3 = Vec3(0.0, -0.3, 0.3)
    home_position: Vec3 = Vec3(-0.2, -0.3, 0.1)


@dataclass(frozen=True)
class WorldSnapshot:
    """Read-only view handed to agents, telemetry, and the bridge."""

    t: float
    position: Vec3
    velocity: float
    arc: float
    target_index: int
    target_label: WaypointLabel
    segment_progress: float
    speed_scale: float
    gripper_closed: bool
    trajectory_done: bool
    force: float
    command: CommandKind


class World:
    """Single-writer simulation state advanced in fixed dt ticks."""

    def __init__(self, config: WorldConfig):
        if config.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 < config.base_speed:
            raise ValueError("base_speed must be positive")
        self.config = config
        self.trajectory = Trajectory(config.waypoints or DEFAULT_WAYPOINTS)
        self.rng = random.Random(config.seed)
        self.t = 0.0
        self.arc = 0.0
        self.speed_scale = 1.0
        self.command = CommandKind.ADVANCE
        self.gripper_closed = True
        self.snags: list[SnagState] = []
        self.retract_left = 0.0
        self.dwell_left = config.waypoint_dwell  # initial alignment pause at HAND
        self.trajectory_done = False
        self.velocity = 0.0
        self.off_path_position: Vec3 | None = None
        self._reached: list[tuple[WaypointLabel, float]] = [(self.trajectory.waypoints[0].label, 0.0)]
        self._next_waypoint = 1
        self.last_sample = ForceSample(0.0, self._force_at(0.0))

    # ------------------------------------------------------------------
    # commands

    def apply(self, cmd: RobotCommand) -> None:
        kind = cmd.kind
        if kind in (CommandKind.ADVANCE, CommandKind.RESUME):
            self.command = CommandKind.ADVANCE
        elif kind == CommandKind.PAUSE:
            self.command = CommandKind.PAUSE
        elif kind == CommandKind.COMPLIANCE:
            self.command = CommandKind.COMPLIANCE
        elif kind == CommandKind.RETRACT:
            if cmd.value is None or cmd.value <= 0:
                raise ValueError("retract step must be positive")
            self.command = CommandKind.RETRACT
            self.retract_left = cmd.value
        elif kind == CommandKind.SET_SPEED_SCALE:
            if cmd.value is None or not 0.0 < cmd.value <= 1.0:
                raise ValueError(f"speed scale out of (0, 1]: {cmd.value}")
            self.speed_scale = cmd.value
        elif kind == CommandKind.OPEN_GRIPPER:
            self.gripper_closed = False
            for snag in self.snags:
                if snag.engaged and not snag.released:
                    snag.released = True
        elif kind == CommandKind.MOVE_SAFE:
            self.command = CommandKind.MOVE_SAFE
            self.off_path_position = self.off_path_position or self.trajectory.point_at(self.arc)
        elif kind == CommandKind.MOVE_HOME:
            self.command = CommandKind.MOVE_HOME
            self.off_path_position = self.off_path_position or self.trajectory.point_at(self.arc)
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unknown command {cmd}")

    def inject_snag(self, spec: SnagSpec) -> None:
        if any(s.spec.id == spec.id for s in self.snags):
            raise ValueError(f"duplicate snag id {spec.id!r}")
        arc = self.trajectory.arc_of(*spec.trigger)
        self.snags.append(SnagState(spec=spec, trigger_arc=arc))

    def resolve_snag_by_assist(self, snag_id: str) -> None:
        for snag in self.snags:
            if snag.spec.id == snag_id:
                if not snag.spec.resolvable_by_assist:
                    raise ValueError(f"snag {snag_id!r} is not assist-resolvable")
                if not snag.engaged or snag.released:
                    raise ValueError(f"snag {snag_id!r} is not engaged")
                snag.released = True
                return
        raise ValueError(f"unknown snag id {snag_id!r}")

    # ------------------------------------------------------------------
    # stepping

    def step(self, dt: float) -> ForceSample:
        if dt == 0.0:
            return self.last_sample
        if abs(dt - self.config.dt) > 1e-12:
            raise ValueError(f"dt {dt} does not match configured tick {self.config.dt}")

        moved = self._move(dt)
        self._update_snags(moved, dt)
        force = self._force_at(abs(moved) / dt if dt else 0.0)
        self.t += dt
        self.velocity = moved / dt
        self.last_sample = ForceSample(self.t, force)
        return self.last_sample

    def _move(self, dt: float) -> float:
        """Advance the end-effector; returns signed arc movement in meters."""
        cmd = self.command
        if cmd == CommandKind.ADVANCE:
            if self.trajectory_done:
                return 0.0
            if self.dwell_left > 0.0:
                self.dwell_left -= dt
                return 0.0
            speed = self.config.base_speed * self.speed_scale
            target_arc = self.trajectory.waypoint_arc(self._next_waypoint)
            new_arc = min(self.arc + speed * dt, target_arc)
            moved = new_arc - self.arc
            self.arc = new_arc
            if self.arc >= target_arc - 1e-12:
                label = self.trajectory.waypoints[self._next_waypoint].label
                self._reached.append((label, self.t + dt))
                if self._next_waypoint == len(self.trajectory.waypoints) - 1:
                    self.trajectory_done = True
                else:
                    self._next_waypoint += 1
                    self.dwell_left = self.config.waypoint_dwell
            return moved
        if cmd == CommandKind.RETRACT:
            speed = self.config.base_speed * self.speed_scale
            step = min(speed * dt, self.retract_left, self.arc)
            self.arc -= step
            self.retract_left -= step
            if self.retract_left <= 1e-12:
                # Recovery lunge: once the step is consumed the robot
                # re-approaches on its own.
                self.command = CommandKind.ADVANCE
                self.retract_left = 0.0
            return -step
        if cmd in (CommandKind.MOVE_SAFE, CommandKind.MOVE_HOME):
            target = (
                self.config.safe_position
                if cmd == CommandKind.MOVE_SAFE
                else self.config.home_position
            )
            pos = self.off_path_position or self.trajectory.point_at(self.arc)
            gap = pos.distance_to(target)
            step = self.config.base_speed * dt
            if gap <= step:
                self.off_path_position = target
                return 0.0
            self.off_path_position = pos.lerp(target, step / gap)
            return 0.0
        return 0.0

    def _update_snags(self, moved: float, dt: float) -> None:
        g = self.config.garment
        prev_arc = self.arc - moved
        for snag in self.snags:
            if snag.released:
                if snag.contribution > 0.0:
                    snag.contribution *= math.exp(-dt / g.release_tau)
                    if snag.contribution < 1e-6:
                        snag.contribution = 0.0
                continue
            spec = snag.spec
            if not snag.engaged:
                crossed = moved > 0 and prev_arc < snag.trigger_arc <= self.arc
                if crossed and self.gripper_closed:
                    snag.engaged = True
                    snag.anchor_arc = snag.trigger_arc
                    snag.engaged_t = self.t + dt
                    # Count the partial-tick advance past the trigger point.
                    snag.contribution = min(
                        spec.ramp_slope * (self.arc - snag.trigger_arc), spec.hold_force
                    )
                continue
            # Engaged, garment still held.
            if not self.gripper_closed:
                snag.released = True
                continue
            if moved > 0:
                snag.contribution = min(
                    snag.contribution + spec.ramp_slope * moved, spec.hold_force
                )
                if spec.extent_m is not None and self.arc - snag.anchor_arc >= spec.extent_m:
                    snag.released = True
                    continue
            elif moved < 0:
                snag.contribution = max(snag.contribution + spec.ramp_slope * moved, 0.0)
                snag.retreat_total += -moved
                if snag.first_retract_t is None:
                    snag.first_retract_t = self.t + dt
            elif self.command == CommandKind.COMPLIANCE:
                target = g.relax_ratio * spec.hold_force
                if snag.contribution > target:
                    snag.contribution = target + (snag.contribution - target) * math.exp(
                        -dt / g.relax_tau
                    )
            if (
                spec.resolvable_by_retraction
                and spec.release_after_retract is not None
                and snag.first_retract_t is not None
                and (self.t + dt) - snag.first_retract_t >= spec.release_after_retract
            ):
                snag.released = True

    def _force_at(self, speed: float) -> float:
        b = self.config.baseline
        noise = self.rng.uniform(-b.noise, b.noise) if b.noise > 0.0 else 0.0
        total = b.c0 + b.c1 * speed + noise
        for snag in self.snags:
            if snag.engaged or snag.released:
                total += snag.contribution
        return max(0.0, total)

    # ------------------------------------------------------------------
    # observations

    def user_pose(self) -> PoseEstimate:
        """Perturbed waypoint estimate; deterministic in (seed, sim time)."""
        bound = self.config.pose_noise
        tick = round(self.t / self.config.dt)
        rng = random.Random(hash((self.config.seed, 0x9E3779B9, tick)))
        positions: dict[WaypointLabel, Vec3] = {}
        for wp in self.trajectory.waypoints:
            if bound > 0.0:
                jitter = Vec3(
                    rng.uniform(-bound, bound),
                    rng.uniform(-bound, bound),
                    rng.uniform(-bound, bound),
                )
                positions[wp.label] = wp.position + jitter
            else:
                positions[wp.label] = wp.position
        return PoseEstimate(self.t, positions)

    def drain_reached(self) -> list[tuple[WaypointLabel, float]]:
        out = self._reached
        self._reached = []
        return out

    def snag_contribution(self, snag_id: str) -> float:
        for snag in self.snags:
            if snag.spec.id == snag_id:
                return snag.contribution
        raise ValueError(f"unknown snag id {snag_id!r}")

    def engaged_assistable_snag(self) -> str | None:
        for snag in self.snags:
            if snag.engaged and not snag.released and snag.spec.resolvable_by_assist:
                return snag.spec.id
        return None

    def snapshot(self) -> WorldSnapshot:
        idx, frac = self.trajectory.locate(self.arc)
        pos = self.off_path_position or self.trajectory.point_at(self.arc)
        return WorldSnapshot(
            t=self.t,
            position=pos,
            velocity=self.velocity,
            arc=self.arc,
            target_index=idx,
            target_label=self.trajectory.waypoints[idx].label,
            segment_progress=frac,
            speed_scale=self.speed_scale,
            gripper_closed=self.gripper_closed,
            trajectory_done=self.trajectory_done,
            force=self.last_sample.magnitude,
            command=self.command,
        )
