"""Live trial sessions: one tick-loop owner per session, queued client input.

Client messages are buffered and drained only at tick boundaries, so nothing
a client sends can take effect in the middle of a simulation step. Force
samples are decimated per wall clock; control events are never dropped.
"""

from __future__ import annotations

import asyncio
import itertools
import time
import uuid
from dataclasses import dataclass, field

from ..control import episode_tracker
from ..harness import TrialRunner
from ..scenario import TrialPlan
from ..telemetry import EventKind
from .schemas import ServerFrame, SessionInfo, SummaryResponse

FORCE_DECIMATION_S = 0.05
YIELD_EVERY_TICKS = 200


@dataclass
class _Inbox:
    chats: list[str] = field(default_factory=list)
    estop: bool = False


class Session:
    def __init__(self, plan: TrialPlan, trial_index: int, real_time_ratio: float, plan_name: str):
        self.id = uuid.uuid4().hex[:12]
        self.plan = plan
        self.plan_name = plan_name
        self.trial_index = trial_index
        self.real_time_ratio = real_time_ratio
        self.runner = TrialRunner(plan, trial_index)
        self.status = "lobby"
        self.clients: dict[int, asyncio.Queue[ServerFrame]] = {}
        self._client_ids = itertools.count(1)
        self.inbox = _Inbox()
        self.task: asyncio.Task | None = None
        self._last_force_wall = 0.0
        self._transcript_sent = 0
        self._last_mode: str | None = None
        self._last_speed: float | None = None

    # -- clients ---------------------------------------------------------

    def attach(self) -> tuple[int, asyncio.Queue]:
        cid = next(self._client_ids)
        queue: asyncio.Queue[ServerFrame] = asyncio.Queue()
        self.clients[cid] = queue
        return cid, queue

    def detach(self, cid: int) -> None:
        self.clients.pop(cid, None)

    def _broadcast(self, frame: ServerFrame) -> None:
        for queue in self.clients.values():
            queue.put_nowait(frame)

    def _frame(self, type_: str, payload: dict) -> ServerFrame:
        return ServerFrame(
            session_id=self.id, t=self.runner.world.t, type=type_, payload=payload
        )

    # -- input -----------------------------------------------------------

    def submit_chat(self, text: str) -> None:
        self.inbox.chats.append(text)

    def submit_estop(self) -> None:
        self.inbox.estop = True

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        if self.status == "running":
            return
        if self.status == "terminal":
            raise RuntimeError("session is terminal; reset it first")
        self.status = "running"
        self.task = asyncio.get_running_loop().create_task(self._tick_loop())

    def reset(self) -> None:
        if self.task is not None:
            self.task.cancel()
            self.task = None
        self.runner = TrialRunner(self.plan, self.trial_index)
        self.status = "lobby"
        self._transcript_sent = 0
        self._last_mode = None
        self._last_speed = None
        self._broadcast(self._frame("status", {"status": "lobby"}))

    async def _tick_loop(self) -> None:
        runner = self.runner
        dt = runner.dt
        ticks = 0
        try:
            while not runner.done:
                inbox, self.inbox = self.inbox, _Inbox()
                for text in inbox.chats:
                    runner.submit_text(text)
                if inbox.estop:
                    runner.submit_estop()

                events = runner.tick()
                self._emit_frames(events)

                ticks += 1
                if self.real_time_ratio > 0:
                    await asyncio.sleep(dt / self.real_time_ratio)
                elif ticks % YIELD_EVERY_TICKS == 0:
                    # Real sleep, not sleep(0): client I/O must get a slice
                    # even while fast-forwarding flat out.
                    await asyncio.sleep(0.001)
            self.status = "terminal"
            self._broadcast(
                self._frame("status", {"status": "terminal", "trial_status": runner.status})
            )
        except asyncio.CancelledError:
            raise
        except Exception as exc:  # pragma: no cover - defensive
            self.status = "terminal"
            self._broadcast(self._frame("error", {"message": str(exc)}))
            raise

    def _emit_frames(self, events) -> None:
        runner = self.runner
        snap = runner.world.snapshot()

        for ev in events:
            self._broadcast(
                self._frame(
                    "control_event",
                    {
                        "t": ev.t,
                        "kind": ev.kind.value,
                        "force": ev.force,
                        "data": ev.data,
                    },
                )
            )
            if ev.kind == EventKind.WAYPOINT_REACHED:
                self._broadcast(self._frame("waypoint", {"label": ev.data["label"]}))
            if ev.kind == EventKind.USER_PROMPTED:
                prompt = runner.dialogue.active_prompt
                allowed = (
                    sorted(i.value for i in prompt.allowed_intents) if prompt else []
                )
                self._broadcast(
                    self._frame(
                        "prompt",
                        {
                            "kind": ev.data.get("prompt_kind"),
                            "text": ev.data.get("text"),
                            "allowed_intents": allowed,
                        },
                    )
                )

        transcript = runner.dialogue.state.transcript
        while self._transcript_sent < len(transcript):
            speaker, text, t = transcript[self._transcript_sent]
            self._transcript_sent += 1
            self._broadcast(
                self._frame("transcript", {"speaker": speaker, "text": text, "t": t})
            )

        mode = runner.controller.mode.value
        if mode != self._last_mode:
            self._last_mode = mode
            self._broadcast(self._frame("mode", {"mode": mode}))
        speed = snap.speed_scale
        if speed != self._last_speed:
            self._last_speed = speed
            self._broadcast(self._frame("speed", {"scale": speed}))

        now = time.monotonic()
        if now - self._last_force_wall >= FORCE_DECIMATION_S:
            self._last_force_wall = now
            self._broadcast(
                self._frame(
                    "force_sample",
                    {
                        "force": runner.samples[-1].magnitude,
                        "velocity": snap.velocity,
                        "arc": snap.arc,
                    },
                )
            )

    # -- views -------------------------------------------------------------

    def info(self) -> SessionInfo:
        return SessionInfo(
            session_id=self.id,
            status=self.status,
            plan_name=self.plan_name,
            variant=self.plan.variant.value,
            sim_time=self.runner.world.t,
            trial_status=self.runner.status,
        )

    def summary(self) -> SummaryResponse:
        log = self.runner.log
        episodes = episode_tracker(log.events)
        pauses = {"trajectory": 0, "pain": 0, "speed_check": 0}
        waypoint = None
        for ev in log.events:
            if ev.kind == EventKind.WAYPOINT_REACHED:
                pauses["trajectory"] += 1
                waypoint = ev.data["label"]
            elif ev.kind == EventKind.PAIN_REPORTED:
                pauses["pain"] += 1
            elif (
                ev.kind == EventKind.USER_PROMPTED
                and ev.data.get("prompt_kind") == "speed_check"
            ):
                pauses["speed_check"] += 1
        escalated = sum(1 for e in episodes if e.cross35_t is not None)
        resolved = sum(1 for e in episodes if e.outcome in ("ResolvedByUser", "ResolvedAutonomously"))
        aborts = sum(1 for e in episodes if e.outcome in ("Aborted", "Timeout"))
        return SummaryResponse(
            session_id=self.id,
            status=self.status,
            trial_status=self.runner.status,
            events=len(log),
            snags=len(episodes),
            potential_snags=len(episodes) - escalated,
            escalated_snags=escalated,
            resolved=resolved,
            aborts=aborts,
            pauses=pauses,
            waypoint_reached=waypoint,
        )
