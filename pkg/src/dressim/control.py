"""Hazard-driven safety controllers.

Four variants share one force-classified state machine:

* HumanIntervention: hazardous force pauses the robot, enters compliance,
  and asks the user to assist or abort.
* Autonomous: hazardous force pauses, dwells in compliance, then cycles
  retract-and-reapproach recovery; episodes running past the timeout abort
  through gripper release, safe position, and home.
* PainLadder: user pain reports step the speed ladder down; bottoming out
  aborts the task.
* Baseline: monitoring only; nothing but an emergency stop halts the robot.

The controller is a pure state machine over (force sample, queued intents);
it never touches the world except through the commands it returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .intent import Intent, Prompt, PromptKind, render_prompt
from .telemetry import ControlEvent, EventKind
from .world import ForceSample, RobotCommand


class InteractionState(Enum):
    NORMAL = "Normal"
    POTENTIAL_SNAG = "PotentialSnag"
    HAZARDOUS = "Hazardous"


class Variant(Enum):
    HUMAN_INTERVENTION = "human_intervention"
    AUTONOMOUS = "autonomous"
    PAIN_LADDER = "pain_ladder"
    BASELINE = "baseline"


class ControllerMode(Enum):
    IDLE = "Idle"
    TRAJECTORY = "TrajectoryMode"
    PAUSED_FOR_USER = "PausedForUser"
    COMPLIANCE = "ComplianceMode"
    RECOVERY = "RecoveryMode"
    AWAITING_INTENT = "AwaitingIntent"
    MOVING_TO_SAFE = "MovingToSafe"
    MOVING_HOME = "MovingHome"
    ABORTED = "Aborted"
    COMPLETED = "Completed"


TERMINAL_MODES = {ControllerMode.ABORTED, ControllerMode.COMPLETED}


@dataclass(frozen=True)
class StrategyConfig:
    variant: Variant
    t15: float = 15.0
    t35: float = 35.0
    resolve_threshold: float = 15.0
    timeout: float = 40.0
    compliance_dwell: float = 1.0
    retract_step: float = 0.02
    hysteresis: float = 1.0
    speed_levels: tuple[float, ...] = (1.0, 0.6, 0.3)
    speed_check_delay: float = 2.0
    prompt_timeout: float = 60.0
    reprompt_limit: int = 2
    abort_stop_dwell: float = 0.5
    safe_move_dwell: float = 2.0
    home_move_dwell: float = 2.0

    def __post_init__(self) -> None:
        if not self.t15 < self.t35:
            raise ValueError("t15 must be below t35")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


def classify_force(f: float, cfg: StrategyConfig | None = None) -> InteractionState:
    """Three-band force classification; boundaries stay in the lower band."""
    if not math.isfinite(f) or f < 0:
        raise ValueError(f"force must be finite and non-negative, got {f}")
    t15 = cfg.t15 if cfg else 15.0
    t35 = cfg.t35 if cfg else 35.0
    if f <= t15:
        return InteractionState.NORMAL
    if f <= t35:
        return InteractionState.POTENTIAL_SNAG
    return InteractionState.HAZARDOUS


# ----------------------------------------------------------------------
# speed ladder


@dataclass(frozen=True)
class SpeedLadder:
    levels: tuple[float, ...] = (1.0, 0.6, 0.3)
    current_index: int = 0

    def __post_init__(self) -> None:
        if any(b >= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("ladder levels must be strictly decreasing")
        if not 0 <= self.current_index < len(self.levels):
            raise ValueError("ladder index out of range")

    @property
    def scale(self) -> float:
        return self.levels[self.current_index]

    @property
    def at_minimum(self) -> bool:
        return self.current_index == len(self.levels) - 1


class AbortRequired:
    """Returned by reduce_speed once the ladder has bottomed out."""

    def __repr__(self) -> str:  # pragma: no cover
        return "AbortRequired"


ABORT_REQUIRED = AbortRequired()


def reduce_speed(ladder: SpeedLadder) -> SpeedLadder | AbortRequired:
    if ladder.at_minimum:
        return ABORT_REQUIRED
    return SpeedLadder(ladder.levels, ladder.current_index + 1)


# ----------------------------------------------------------------------
# episodes


@dataclass
class SnagEpisode:
    detect15_t: float
    cross35_t: float | None = None
    resolved_t: float | None = None
    peak_force: float = 0.0
    attempts: int = 0
    outcome: str | None = None
    duration: float | None = None


def episode_tracker(events) -> list[SnagEpisode]:
    """Rebuild snag episodes from a time-ordered event stream.

    Independent of the controller's internal accounting, so the two can be
    cross-checked in tests.
    """
    episodes: list[SnagEpisode] = []
    open_ep: SnagEpisode | None = None
    last_t = -math.inf
    for ev in events:
        if ev.t < last_t:
            raise ValueError(f"event stream not time-ordered at t={ev.t}")
        last_t = ev.t
        if ev.force is not None and open_ep is not None:
            open_ep.peak_force = max(open_ep.peak_force, ev.force)
        kind = ev.kind
        if kind == EventKind.POTENTIAL_SNAG_DETECTED:
            if open_ep is not None:
                raise ValueError("snag episode opened while another is open")
            open_ep = SnagEpisode(detect15_t=ev.t, peak_force=ev.force or 0.0)
        elif open_ep is None:
            continue
        elif kind == EventKind.CROSS35:
            if open_ep.cross35_t is None:
                open_ep.cross35_t = ev.t
        elif kind == EventKind.RECOVERY_ENTERED:
            open_ep.attempts += 1
        elif kind == EventKind.SNAG_RESOLVED:
            open_ep.resolved_t = ev.t
            open_ep.duration = ev.data.get("duration", ev.t - open_ep.detect15_t)
            open_ep.outcome = {
                "potential_only": "PotentialOnly",
                "user": "ResolvedByUser",
                "auto": "ResolvedAutonomously",
                "timeout": "Timeout",
            }[ev.data.get("outcome", "auto")]
            if "peak" in ev.data:
                open_ep.peak_force = max(open_ep.peak_force, ev.data["peak"])
            episodes.append(open_ep)
            open_ep = None
        elif kind in (EventKind.GRIPPER_OPENED, EventKind.TRIAL_ABORTED, EventKind.EMERGENCY_STOP):
            open_ep.duration = ev.t - open_ep.detect15_t
            open_ep.outcome = (
                "Timeout" if ev.data.get("reason") == "timeout" else "Aborted"
            )
            if "peak" in ev.data:
                open_ep.peak_force = max(open_ep.peak_force, ev.data["peak"])
            episodes.append(open_ep)
            open_ep = None
    return episodes


# ----------------------------------------------------------------------
# controller


@dataclass
class TickResult:
    commands: list[RobotCommand] = field(default_factory=list)
    events: list[ControlEvent] = field(default_factory=list)
    prompt: Prompt | None = None
    says: list[str] = field(default_factory=list)


@dataclass
class _Episode:
    detect_t: float
    peak: float
    crossed: bool = False
    attempts: int = 0


class Controller:
    def __init__(self, cfg: StrategyConfig):
        self.cfg = cfg
        self.mode = ControllerMode.TRAJECTORY
        self.ladder = SpeedLadder(cfg.speed_levels)
        self._armed15 = True
        self._armed35 = True
        self._episode: _Episode | None = None
        self._auto_active = cfg.variant == Variant.AUTONOMOUS
        self._dwell_until: float | None = None
        self._prompt: Prompt | None = None
        self._prompt_at = 0.0
        self._strikes = 0
        self._speed_check_at: float | None = None
        self._abort_plan: list[tuple[float, str]] = []
        self._abort_reason = ""
        self._saved: tuple[ControllerMode, Prompt | None] | None = None
        self.terminal_status: str | None = None

    # -- helpers -------------------------------------------------------

    @property
    def is_terminal(self) -> bool:
        return self.mode in TERMINAL_MODES

    def mark_completed(self) -> None:
        self.mode = ControllerMode.COMPLETED
        self.terminal_status = "Completed"

    def _emit(self, out: TickResult, t: float, kind: EventKind, force=None, **data) -> None:
        out.events.append(ControlEvent(t=t, kind=kind, force=force, data=data))

    def _issue_prompt(self, out: TickResult, t: float, kind: PromptKind) -> None:
        prompt = render_prompt(kind)
        if self._prompt is None or self._prompt.kind is not kind:
            self._strikes = 0  # fresh prompt; re-issues keep the strike count
        self._prompt = prompt
        self._prompt_at = t
        out.prompt = prompt
        self._emit(out, t, EventKind.USER_PROMPTED, text=prompt.text, prompt_kind=kind.value)

    def _start_abort(self, out: TickResult, t: float, f: float, reason: str) -> None:
        cfg = self.cfg
        self._abort_reason = reason
        peak = self._episode.peak if self._episode else f
        self._emit(out, t, EventKind.GRIPPER_OPENED, force=f, reason=reason, peak=peak)
        self._emit(out, t, EventKind.ROBOT_STOPPED)
        out.commands.append(RobotCommand.pause())
        out.commands.append(RobotCommand.open_gripper())
        self._episode = None
        self._prompt = None
        self.mode = ControllerMode.MOVING_TO_SAFE
        self._abort_plan = [
            (t + cfg.abort_stop_dwell, "safe"),
            (t + cfg.abort_stop_dwell + cfg.safe_move_dwell, "home"),
            (t + cfg.abort_stop_dwell + cfg.safe_move_dwell + cfg.home_move_dwell, "end"),
        ]

    def _run_abort_plan(self, out: TickResult, t: float) -> None:
        while self._abort_plan and t >= self._abort_plan[0][0]:
            _, step = self._abort_plan.pop(0)
            if step == "safe":
                self._emit(out, t, EventKind.MOVED_TO_SAFE)
                out.commands.append(RobotCommand.move_safe())
                self.mode = ControllerMode.MOVING_TO_SAFE
            elif step == "home":
                self._emit(out, t, EventKind.MOVED_HOME)
                out.commands.append(RobotCommand.move_home())
                self.mode = ControllerMode.MOVING_HOME
            else:
                self._emit(out, t, EventKind.TRIAL_ABORTED, reason=self._abort_reason)
                self.mode = ControllerMode.ABORTED
                self.terminal_status = "Aborted"

    def _close_resolved(self, out: TickResult, t: float, f: float, outcome: str) -> None:
        ep = self._episode
        duration = t - ep.detect_t
        timed_out = outcome == "auto" and self._auto_active and duration > self.cfg.timeout
        if outcome == "user":
            self._emit(out, t, EventKind.TRAJECTORY_MODE_ENTERED)
            self._emit(
                out, t, EventKind.SNAG_RESOLVED,
                force=f, duration=duration, outcome="user", peak=ep.peak,
            )
            out.commands.append(RobotCommand.resume())
            self.mode = ControllerMode.TRAJECTORY
        elif timed_out:
            # Recovery finished, but only after the time budget was spent:
            # close the episode, then abort anyway.
            self._emit(
                out, t, EventKind.SNAG_RESOLVED,
                force=f, duration=duration, outcome="timeout", peak=ep.peak,
            )
            self._start_abort(out, t, f, "timeout")
            return
        else:
            self._emit(
                out, t, EventKind.SNAG_RESOLVED,
                force=f, duration=duration, outcome=outcome, peak=ep.peak,
            )
            if outcome != "potential_only":
                self._emit(out, t, EventKind.TRAJECTORY_MODE_ENTERED)
                out.commands.append(RobotCommand.resume())
                self.mode = ControllerMode.TRAJECTORY
        self._episode = None

    # -- main ----------------------------------------------------------

    def tick(self, sample: ForceSample, intents: list[Intent]) -> TickResult:
        if self.is_terminal:
            raise RuntimeError("tick() on terminal controller")
        cfg = self.cfg
        t, f = sample.t, sample.magnitude
        state = classify_force(f, cfg)
        out = TickResult()
        baseline = cfg.variant == Variant.BASELINE

        # Reaction bound: any hazardous sample halts the robot this tick.
        if state == InteractionState.HAZARDOUS and not baseline:
            out.commands.append(RobotCommand.pause())

        self._detect(out, t, f)
        crossing = self._detect35(out, t, f)

        if not baseline:
            self._check_timeout(out, t, f, state)
            if not self.is_terminal and self.mode not in (
                ControllerMode.MOVING_TO_SAFE,
                ControllerMode.MOVING_HOME,
            ):
                if state == InteractionState.HAZARDOUS and self.mode in (
                    ControllerMode.TRAJECTORY,
                    ControllerMode.RECOVERY,
                ):
                    self._hazard_response(out, t, f)
                self._run_dwell(out, t)
                self._check_resolution(out, t, f)

        for intent in intents:
            if self.is_terminal:
                break
            self._handle_intent(out, t, f, intent)

        if not self.is_terminal:
            self._run_schedulers(out, t, f)
            self._run_abort_plan(out, t)

        if self.mode == ControllerMode.TRAJECTORY:
            out.commands.append(RobotCommand.advance())
        return out

    # -- detection -----------------------------------------------------

    def _detect(self, out: TickResult, t: float, f: float) -> None:
        cfg = self.cfg
        if self._episode is not None:
            self._episode.peak = max(self._episode.peak, f)
        if self._armed15 and f > cfg.t15:
            self._armed15 = False
            if self._episode is None:
                self._episode = _Episode(detect_t=t, peak=f)
                self._emit(out, t, EventKind.POTENTIAL_SNAG_DETECTED, force=f)
        elif not self._armed15 and f < cfg.t15 - cfg.hysteresis:
            self._armed15 = True
            if (
                self._episode is not None
                and not self._episode.crossed
                and self.mode == ControllerMode.TRAJECTORY
            ):
                self._close_resolved(out, t, f, "potential_only")

    def _detect35(self, out: TickResult, t: float, f: float) -> bool:
        cfg = self.cfg
        crossing = False
        if self._armed35 and f > cfg.t35:
            self._armed35 = False
            crossing = True
            if self._episode is None:
                # Force jumped both bands inside one tick.
                self._episode = _Episode(detect_t=t, peak=f)
                self._emit(out, t, EventKind.POTENTIAL_SNAG_DETECTED, force=f)
            self._episode.crossed = True
            self._emit(out, t, EventKind.CROSS35, force=f)
        elif not self._armed35 and f < cfg.t35 - cfg.hysteresis:
            self._armed35 = True
        return crossing

    def _check_timeout(self, out: TickResult, t: float, f: float, state) -> None:
        """Abort once an episode has run past the budget while still hazardous.

        Sub-hazardous recovery motion is allowed to finish; an episode that
        closes late is caught in _close_resolved instead.
        """
        ep = self._episode
        if (
            ep is not None
            and self._auto_active
            and state == InteractionState.HAZARDOUS
            and (t - ep.detect_t) > self.cfg.timeout
            and self.mode
            in (ControllerMode.COMPLIANCE, ControllerMode.RECOVERY, ControllerMode.TRAJECTORY)
        ):
            self._start_abort(out, t, f, "timeout")

    def _hazard_response(self, out: TickResult, t: float, f: float) -> None:
        out.commands.append(RobotCommand.compliance())
        self._emit(out, t, EventKind.ROBOT_STOPPED)
        self._emit(out, t, EventKind.COMPLIANCE_ENTERED)
        self.mode = ControllerMode.COMPLIANCE
        if self._episode is None:
            self._episode = _Episode(detect_t=t, peak=f, crossed=True)
        if self._auto_active:
            self._dwell_until = t + self.cfg.compliance_dwell
        else:
            self._issue_prompt(out, t, PromptKind.SNAG_ASSIST)

    def _run_dwell(self, out: TickResult, t: float) -> None:
        if (
            self.mode == ControllerMode.COMPLIANCE
            and self._auto_active
            and self._dwell_until is not None
            and t >= self._dwell_until
        ):
            self._dwell_until = None
            self.mode = ControllerMode.RECOVERY
            if self._episode is not None:
                self._episode.attempts += 1
            self._emit(out, t, EventKind.RECOVERY_ENTERED)
            out.commands.append(RobotCommand.retract(self.cfg.retract_step))

    def _check_resolution(self, out: TickResult, t: float, f: float) -> None:
        if (
            self.mode == ControllerMode.RECOVERY
            and self._episode is not None
            and f < self.cfg.resolve_threshold
        ):
            self._close_resolved(out, t, f, "auto")

    # -- intents -------------------------------------------------------

    def _handle_intent(self, out: TickResult, t: float, f: float, intent: Intent) -> None:
        cfg = self.cfg
        if intent == Intent.EMERGENCY_STOP:
            self._emit(
                out, t, EventKind.EMERGENCY_STOP, force=f,
                peak=self._episode.peak if self._episode else f,
            )
            out.commands.append(RobotCommand.pause())
            self.mode = ControllerMode.ABORTED
            self.terminal_status = "EmergencyStop"
            return
        if cfg.variant == Variant.BASELINE:
            return  # no control strategy: only the e-stop does anything

        if intent == Intent.PAUSE_DRESSING:
            if self.mode not in (
                ControllerMode.MOVING_TO_SAFE,
                ControllerMode.MOVING_HOME,
                ControllerMode.PAUSED_FOR_USER,
            ):
                self._saved = (self.mode, self._prompt)
                out.commands.append(RobotCommand.pause())
                self.mode = ControllerMode.PAUSED_FOR_USER
                self._issue_prompt(out, t, PromptKind.PAUSED)
            return
        if intent == Intent.RESUME_DRESSING:
            if self.mode == ControllerMode.PAUSED_FOR_USER and self._saved is not None:
                mode, prompt = self._saved
                self._saved = None
                self.mode = mode
                self._prompt = prompt
                if mode == ControllerMode.TRAJECTORY:
                    out.commands.append(RobotCommand.resume())
                    self._emit(out, t, EventKind.TRAJECTORY_MODE_ENTERED)
                elif mode == ControllerMode.COMPLIANCE:
                    out.commands.append(RobotCommand.compliance())
                if prompt is not None:
                    out.prompt = prompt
                    self._prompt_at = t
            return
        if intent == Intent.REPORT_PAIN:
            out.commands.append(RobotCommand.pause())
            self._emit(out, t, EventKind.PAIN_REPORTED, force=f)
            if self.mode in (ControllerMode.TRAJECTORY, ControllerMode.AWAITING_INTENT):
                self.mode = ControllerMode.AWAITING_INTENT
            self._speed_check_at = None
            self._issue_prompt(out, t, PromptKind.PAIN_CHOICE)
            return

        prompt = self._prompt
        if prompt is None:
            return
        if intent == Intent.UNKNOWN:
            self._strikes += 1
            if (
                self._strikes >= cfg.reprompt_limit
                and prompt.kind in (PromptKind.SNAG_ASSIST,)
            ):
                # Repeated unintelligible replies while a snag waits: treat
                # as the user being unable to resolve it.
                self._handle_intent(out, t, f, Intent.CANNOT_RESOLVE)
            else:
                self._issue_prompt(out, t, prompt.kind)
            return
        if intent not in prompt.allowed_intents:
            self._issue_prompt(out, t, prompt.kind)
            return

        kind = prompt.kind
        if intent == Intent.ABORT_TASK:
            out.says.append(render_prompt(PromptKind.ABORTED).text)
            self._prompt = None
            self._start_abort(out, t, f, "user")
        elif intent == Intent.SNAG_ASSIST:
            pass  # stay compliant; prompt stays open until the fix is confirmed
        elif intent == Intent.CONFIRM_FIXED:
            self._prompt = None
            if self._episode is not None:
                self._close_resolved(out, t, f, "user")
            else:
                out.commands.append(RobotCommand.resume())
                self.mode = ControllerMode.TRAJECTORY
        elif intent == Intent.CANNOT_RESOLVE:
            self._issue_prompt(out, t, PromptKind.SNAG_ESCALATE)
        elif intent == Intent.AUTONOMOUS_RECOVER:
            self._prompt = None
            self._auto_active = True
            self.mode = ControllerMode.RECOVERY
            if self._episode is not None:
                self._episode.attempts += 1
            self._emit(out, t, EventKind.RECOVERY_ENTERED)
            out.commands.append(RobotCommand.retract(cfg.retract_step))
        elif intent == Intent.MORE_GENTLE:
            self._prompt = None
            reduced = reduce_speed(self.ladder)
            if isinstance(reduced, AbortRequired):
                out.says.append(render_prompt(PromptKind.PAIN_ABORT).text)
                self._start_abort(out, t, f, "pain")
            else:
                old = self.ladder.scale
                self.ladder = reduced
                self._emit(
                    out, t, EventKind.SPEED_REDUCED,
                    from_scale=old, to_scale=reduced.scale,
                )
                out.commands.append(RobotCommand.set_speed_scale(reduced.scale))
                out.commands.append(RobotCommand.resume())
                self.mode = ControllerMode.TRAJECTORY
                self._speed_check_at = t + cfg.speed_check_delay
        elif intent == Intent.SPEED_OK:
            self._prompt = None
            out.commands.append(RobotCommand.resume())
            self.mode = ControllerMode.TRAJECTORY

    # -- schedulers ----------------------------------------------------

    def _run_schedulers(self, out: TickResult, t: float, f: float) -> None:
        cfg = self.cfg
        if (
            self._speed_check_at is not None
            and t >= self._speed_check_at
            and self.mode == ControllerMode.TRAJECTORY
        ):
            self._speed_check_at = None
            out.commands.append(RobotCommand.pause())
            self.mode = ControllerMode.AWAITING_INTENT
            self._issue_prompt(out, t, PromptKind.SPEED_CHECK)
        if (
            self._prompt is not None
            and out.prompt is None
            and t - self._prompt_at > cfg.prompt_timeout
        ):
            self._strikes += 1
            if self._strikes >= cfg.reprompt_limit and self._prompt.kind is not PromptKind.PAUSED:
                # Nobody is answering: fail safe instead of waiting forever.
                if self._prompt.kind is PromptKind.SNAG_ASSIST:
                    self._handle_intent(out, t, f, Intent.CANNOT_RESOLVE)
                else:
                    self._handle_intent(out, t, f, Intent.ABORT_TASK)
            else:
                self._issue_prompt(out, t, self._prompt.kind)
