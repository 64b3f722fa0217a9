"""Trial composition: world + controller + dialogue + scripted agent.

``TrialRunner`` advances one trial a tick at a time so the same machinery
drives both headless batch runs and the live bridge service.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .agents import AgentView, EStopPress, NoAgent, UserAgent, Utterance, build_agent
from .control import Controller, ControllerMode
from .intent import DialogueManager, Intent, load_corpus
from .scenario import TrialPlan, load_plan
from .telemetry import (
    ControlEvent,
    Dialect,
    EventKind,
    EventLog,
    TrialSummary,
    export_jsonl,
    export_summary_csv,
    render_log,
    summarize,
)
from .world import ForceSample, World


@dataclass
class TrialResult:
    log: EventLog
    summary: TrialSummary
    samples: list[ForceSample]
    status: str


@dataclass
class _PendingAssist:
    due_t: float
    snag_id: str


class TrialRunner:
    """One deterministic trial, advanced tick by tick."""

    def __init__(self, plan: TrialPlan, index: int = 0, agent: UserAgent | None = None):
        self.plan = plan
        seed = plan.seeds[index]
        scenario = plan.scenario_for(index)
        self.world = World(scenario.world_config(seed=seed))
        for spec in scenario.snags:
            self.world.inject_snag(spec)
        self.controller = Controller(scenario.strategy)
        self.corpus = load_corpus()
        self.dialogue = DialogueManager(self.corpus)
        if agent is not None:
            self.agent = agent
        else:
            self.agent = build_agent(plan.agent_for(index), self.corpus, seed)
        self.log = EventLog(epoch=scenario.epoch)
        self.samples: list[ForceSample] = []
        self.dt = scenario.dt
        self._pending_intents: list[Intent] = []
        self._pending_assists: list[_PendingAssist] = []
        self._prompt_since = 0.0
        self._tick_events: list[ControlEvent] = []
        self.last_commands: list = []
        self.done = False
        self.status: str | None = None

    def _record(self, event: ControlEvent) -> None:
        self.log.record(event)
        self._tick_events.append(event)

    # -- client-facing inputs (bridge, agents) --------------------------

    def submit_text(self, text: str) -> str | None:
        """Route user text through the dialogue; queue any forwarded intent."""
        t = self.world.t
        intent, reply = self.dialogue.dispatch(text, t)
        if intent is not None:
            self._record(
                ControlEvent(
                    t=t,
                    kind=EventKind.USER_RESPONDED,
                    data={"text": text, "intent": intent.value},
                )
            )
            self._pending_intents.append(intent)
            if intent == Intent.SNAG_ASSIST:
                self._schedule_assist(t)
        return reply

    def submit_estop(self) -> None:
        self._pending_intents.append(Intent.EMERGENCY_STOP)

    def _schedule_assist(self, t: float) -> None:
        snag_id = self.world.engaged_assistable_snag()
        if snag_id is None:
            return
        spec = next(s.spec for s in self.world.snags if s.spec.id == snag_id)
        self._pending_assists.append(_PendingAssist(t + spec.assist_delay, snag_id))

    # -- tick ------------------------------------------------------------

    def tick(self) -> list[ControlEvent]:
        """Advance one tick; returns the events recorded during it."""
        if self.done:
            return []
        sample = self.world.step(self.dt)
        self.samples.append(sample)
        t = sample.t

        for label, t_reached in self.world.drain_reached():
            self._record(
                ControlEvent(
                    t=t_reached, kind=EventKind.WAYPOINT_REACHED, data={"label": label.value}
                )
            )

        while self._pending_assists and self._pending_assists[0].due_t <= t:
            pending = self._pending_assists.pop(0)
            try:
                self.world.resolve_snag_by_assist(pending.snag_id)
            except ValueError:
                pass  # already released (e.g. gripper opened first)

        if not isinstance(self.agent, NoAgent):
            view = AgentView(
                snapshot=self.world.snapshot(),
                active_prompt=self.dialogue.active_prompt,
                prompt_since=self._prompt_since,
            )
            action = self.agent.poll(view)
            if isinstance(action, Utterance):
                self.submit_text(action.text)
            elif isinstance(action, EStopPress):
                self.submit_estop()

        intents = self._pending_intents
        self._pending_intents = []
        result = self.controller.tick(sample, intents)
        for ev in result.events:
            self._record(ev)
        if result.prompt is not None:
            self.dialogue.present(result.prompt, t)
            self._prompt_since = t
        for text in result.says:
            self.dialogue.say_system(text, t)
        self.last_commands = result.commands
        for cmd in result.commands:
            self.world.apply(cmd)

        if self.controller.is_terminal:
            self.done = True
            self.status = self.controller.terminal_status
        elif self.world.trajectory_done and self.controller.mode == ControllerMode.TRAJECTORY:
            self.controller.mark_completed()
            self._record(ControlEvent(t=t, kind=EventKind.TRIAL_COMPLETED))
            self.done = True
            self.status = "Completed"
        elif t > self.plan.max_sim_s:
            raise RuntimeError(f"trial exceeded max_sim_s={self.plan.max_sim_s}")
        events, self._tick_events = self._tick_events, []
        return events

    def run(self) -> TrialResult:
        while not self.done:
            self.tick()
        return TrialResult(
            log=self.log,
            summary=summarize([self.log]),
            samples=self.samples,
            status=self.status or "Completed",
        )


def run_trial(plan: TrialPlan, index: int) -> TrialResult:
    if not 0 <= index < plan.repetitions:
        raise ValueError(f"trial index {index} out of range")
    return TrialRunner(plan, index).run()


def run_batch(plan: TrialPlan, out_dir: str | Path | None = None) -> tuple[TrialSummary, list[TrialResult]]:
    """Run every repetition; optionally write logs, dialect text, and CSV."""
    results = [run_trial(plan, i) for i in range(plan.repetitions)]
    merged = TrialSummary()
    for res in results:
        merged.merge(res.summary)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        dialect = (
            Dialect.AUTONOMOUS if plan.dialect == "auto" else Dialect.HUMAN_INTERVENTION
        )
        for i, res in enumerate(results):
            (out / f"{plan.name}_{i:03d}.jsonl").write_bytes(export_jsonl(res.log))
            (out / f"{plan.name}_{i:03d}.log").write_text(render_log(res.log, dialect))
        (out / f"{plan.name}_summary.csv").write_bytes(export_summary_csv(merged))
    return merged, results


# ----------------------------------------------------------------------
# golden replay

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_PLAN_PATH = DATA_DIR / "plans" / "autonomous_golden.json"
GOLDEN_FIXTURE_PATH = DATA_DIR / "golden_trace.txt"

# Reference event order for the bundled autonomous demo: two snag episodes,
# the second resolving only after the 40 s budget, then the abort chain.
GOLDEN_KINDS = [
    "PotentialSnagDetected",
    "Cross35",
    "RobotStopped",
    "ComplianceEntered",
    "RecoveryEntered",
    "SnagResolved",
    "PotentialSnagDetected",
    "Cross35",
    "RobotStopped",
    "ComplianceEntered",
    "RecoveryEntered",
    "Cross35",
    "RobotStopped",
    "ComplianceEntered",
    "RecoveryEntered",
    "Cross35",
    "RobotStopped",
    "ComplianceEntered",
    "RecoveryEntered",
    "Cross35",
    "RobotStopped",
    "ComplianceEntered",
    "RecoveryEntered",
    "SnagResolved",
    "GripperOpened",
    "RobotStopped",
    "MovedToSafe",
    "MovedHome",
]

GOLDEN_DURATIONS = (15.2439, 40.7902)
GOLDEN_TOLERANCE = 0.02  # 2 ticks at the scenario's configured 10 ms
GOLDEN_TRACKED = {
    EventKind.POTENTIAL_SNAG_DETECTED,
    EventKind.CROSS35,
    EventKind.ROBOT_STOPPED,
    EventKind.COMPLIANCE_ENTERED,
    EventKind.RECOVERY_ENTERED,
    EventKind.SNAG_RESOLVED,
    EventKind.GRIPPER_OPENED,
    EventKind.MOVED_TO_SAFE,
    EventKind.MOVED_HOME,
}


@dataclass
class GoldenVerdict:
    passed: bool
    message: str
    result: TrialResult | None = None


def replay_golden(
    dt: float | None = None, timeout: float | None = None, tolerance: float | None = None
) -> GoldenVerdict:
    """Re-run the bundled autonomous scenario and diff it against the
    reference event order and episode durations."""
    from dataclasses import replace

    plan = load_plan(GOLDEN_PLAN_PATH)
    scenario = plan.scenario
    if dt is not None:
        scenario = replace(scenario, dt=dt)
    if timeout is not None:
        scenario = replace(scenario, strategy=replace(scenario.strategy, timeout=timeout))
    plan = replace(plan, scenario=scenario)
    result = run_trial(plan, 0)

    kinds = [ev.kind.value for ev in result.log.events if ev.kind in GOLDEN_TRACKED]
    for i, (got, want) in enumerate(zip(kinds, GOLDEN_KINDS)):
        if got != want:
            return GoldenVerdict(
                False, f"event {i}: got {got}, want {want}", result
            )
    if len(kinds) != len(GOLDEN_KINDS):
        return GoldenVerdict(
            False,
            f"event count mismatch: got {len(kinds)}, want {len(GOLDEN_KINDS)}"
            + (f" (first extra: {kinds[len(GOLDEN_KINDS)]})" if len(kinds) > len(GOLDEN_KINDS) else ""),
            result,
        )

    durations = [
        ev.data["duration"]
        for ev in result.log.events
        if ev.kind == EventKind.SNAG_RESOLVED
    ]
    tol = tolerance if tolerance is not None else GOLDEN_TOLERANCE
    for got, want in zip(durations, GOLDEN_DURATIONS):
        if abs(got - want) > tol:
            return GoldenVerdict(
                False, f"episode duration {got:.4f}s outside {want}±{tol}", result
            )
    return GoldenVerdict(True, "golden trace reproduced", result)

