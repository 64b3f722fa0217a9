"""Scripted users for batch trials.

Agents observe trial snapshots and interact only through chat text and the
emergency-stop channel, exactly like a human at the console would. Utterances
are sampled from the intent corpus so the classifier is exercised end to end.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .geometry import WaypointLabel
from .intent import Corpus, Intent, Prompt, PromptKind
from .scenario import AgentSpec
from .world import WorldSnapshot


@dataclass(frozen=True)
class AgentView:
    """What an agent is allowed to see each tick."""

    snapshot: WorldSnapshot
    active_prompt: Prompt | None
    prompt_since: float


@dataclass(frozen=True)
class Utterance:
    text: str


@dataclass(frozen=True)
class EStopPress:
    pass


AgentAction = Utterance | EStopPress


class UserAgent:
    def poll(self, view: AgentView) -> AgentAction | None:  # pragma: no cover
        raise NotImplementedError


class _Speaker(UserAgent):
    def __init__(self, corpus: Corpus, seed: int):
        self._examples = {intent: utts for intent, utts in corpus.examples}
        self._rng = random.Random(seed)

    def say(self, intent: Intent) -> Utterance:
        return Utterance(self._rng.choice(self._examples[intent]))


class NoAgent(UserAgent):
    def poll(self, view: AgentView) -> None:
        return None


class AssistiveAgent(_Speaker):
    """Answers snag prompts, fixes the garment, and confirms.

    After ``assist_limit`` successful assists the user gives up: further snag
    prompts are answered cannot_resolve, then per ``escalate_choice``.
    """

    def __init__(self, corpus, seed, delay_s=1.0, assist_limit=None, escalate_choice="abort"):
        super().__init__(corpus, seed)
        self.delay_s = delay_s
        self.assist_limit = assist_limit
        self.escalate_choice = escalate_choice
        self._assists = 0
        self._answered_at: float | None = None
        self._awaiting_fix = False

    def poll(self, view: AgentView) -> AgentAction | None:
        prompt = view.active_prompt
        t = view.snapshot.t
        if prompt is None:
            self._answered_at = None
            return None
        if self._awaiting_fix:
            # Confirm once the garment force visibly settled.
            if view.snapshot.force < 14.0 and t - view.prompt_since >= self.delay_s:
                self._awaiting_fix = False
                return self.say(Intent.CONFIRM_FIXED)
            return None
        if t - view.prompt_since < self.delay_s:
            return None
        if self._answered_at is not None and self._answered_at >= view.prompt_since:
            return None
        self._answered_at = t
        if prompt.kind == PromptKind.SNAG_ASSIST:
            if self.assist_limit is None or self._assists < self.assist_limit:
                self._assists += 1
                self._awaiting_fix = True
                return self.say(Intent.SNAG_ASSIST)
            return self.say(Intent.CANNOT_RESOLVE)
        if prompt.kind == PromptKind.SNAG_ESCALATE:
            if self.escalate_choice == "autonomous":
                return self.say(Intent.AUTONOMOUS_RECOVER)
            return self.say(Intent.ABORT_TASK)
        return None


class NonAssistiveAgent(_Speaker):
    """Declines to help; picks abort or autonomous recovery when pressed."""

    def __init__(self, corpus, seed, delay_s=1.0, escalate_choice="abort"):
        super().__init__(corpus, seed)
        self.delay_s = delay_s
        self.escalate_choice = escalate_choice
        self._answered_at: float | None = None

    def poll(self, view: AgentView) -> AgentAction | None:
        prompt = view.active_prompt
        t = view.snapshot.t
        if prompt is None:
            self._answered_at = None
            return None
        if t - view.prompt_since < self.delay_s:
            return None
        if self._answered_at is not None and self._answered_at >= view.prompt_since:
            return None
        self._answered_at = t
        if prompt.kind == PromptKind.SNAG_ASSIST:
            return self.say(Intent.CANNOT_RESOLVE)
        if prompt.kind == PromptKind.SNAG_ESCALATE:
            if self.escalate_choice == "autonomous":
                return self.say(Intent.AUTONOMOUS_RECOVER)
            return self.say(Intent.ABORT_TASK)
        return None


class PainReporterAgent(_Speaker):
    """Reports pain at scripted trajectory marks and works the speed ladder.

    Answers every PainChoice with more_gentle. SpeedCheck prompts consume
    ``gentle_repeats`` further more_gentle answers, then switch to speed_ok.
    """

    def __init__(self, corpus, seed, pain_at, gentle_repeats=0, delay_s=1.0):
        super().__init__(corpus, seed)
        self.delay_s = delay_s
        self._marks = [(WaypointLabel(lbl), float(prog)) for lbl, prog in pain_at]
        self._repeats_left = gentle_repeats
        self._answered_at: float | None = None

    def poll(self, view: AgentView) -> AgentAction | None:
        snap = view.snapshot
        t = snap.t
        prompt = view.active_prompt
        if prompt is not None:
            if t - view.prompt_since < self.delay_s:
                return None
            if self._answered_at is not None and self._answered_at >= view.prompt_since:
                return None
            self._answered_at = t
            if prompt.kind == PromptKind.PAIN_CHOICE:
                return self.say(Intent.MORE_GENTLE)
            if prompt.kind == PromptKind.SPEED_CHECK:
                if self._repeats_left > 0:
                    self._repeats_left -= 1
                    return self.say(Intent.MORE_GENTLE)
                return self.say(Intent.SPEED_OK)
            return None
        self._answered_at = None
        if self._marks and snap.command.value == "advance" and not snap.trajectory_done:
            label, progress = self._marks[0]
            # Segment leaving `label`: snapshot target is the segment's end.
            reached = False
            target_idx = snap.target_index
            if target_idx > 0:
                seg_start = _SEGMENT_STARTS[snap.target_label]
                if seg_start == label and snap.segment_progress >= progress:
                    reached = True
                elif _LABEL_RANK[seg_start] > _LABEL_RANK[label]:
                    reached = True
            if reached:
                self._marks.pop(0)
                return self.say(Intent.REPORT_PAIN)
        return None


_LABEL_RANK = {
    WaypointLabel.HAND: 0,
    WaypointLabel.LWRS: 1,
    WaypointLabel.LELB: 2,
    WaypointLabel.LSHO: 3,
}

# Target label -> label of the waypoint the segment leaves from.
_SEGMENT_STARTS = {
    WaypointLabel.LWRS: WaypointLabel.HAND,
    WaypointLabel.LELB: WaypointLabel.LWRS,
    WaypointLabel.LSHO: WaypointLabel.LELB,
    WaypointLabel.HAND: WaypointLabel.HAND,
}


class SpeedAccepterAgent(_Speaker):
    """Accepts any speed reduction at the first check."""

    def __init__(self, corpus, seed, delay_s=1.0):
        super().__init__(corpus, seed)
        self.delay_s = delay_s
        self._answered_at: float | None = None

    def poll(self, view: AgentView) -> AgentAction | None:
        prompt = view.active_prompt
        t = view.snapshot.t
        if prompt is None:
            self._answered_at = None
            return None
        if t - view.prompt_since < self.delay_s:
            return None
        if self._answered_at is not None and self._answered_at >= view.prompt_since:
            return None
        self._answered_at = t
        if prompt.kind == PromptKind.SPEED_CHECK:
            return self.say(Intent.SPEED_OK)
        if prompt.kind == PromptKind.PAIN_CHOICE:
            return self.say(Intent.MORE_GENTLE)
        return None


class EStopperAgent(UserAgent):
    """Presses the emergency stop once the force passes a personal limit."""

    def __init__(self, threshold_n: float):
        if threshold_n <= 35.0:
            raise ValueError("estop threshold must sit above the hazard band")
        self.threshold_n = threshold_n
        self._pressed = False

    def poll(self, view: AgentView) -> AgentAction | None:
        if not self._pressed and view.snapshot.force >= self.threshold_n:
            self._pressed = True
            return EStopPress()
        return None


def build_agent(spec: AgentSpec, corpus: Corpus, seed: int) -> UserAgent:
    if spec.kind == "none":
        return NoAgent()
    if spec.kind == "assistive":
        return AssistiveAgent(
            corpus, seed, spec.delay_s, spec.assist_limit, spec.escalate_choice
        )
    if spec.kind == "non_assistive":
        return NonAssistiveAgent(corpus, seed, spec.delay_s, spec.escalate_choice)
    if spec.kind == "pain_reporter":
        return PainReporterAgent(corpus, seed, spec.pain_at, spec.gentle_repeats, spec.delay_s)
    if spec.kind == "speed_accepter":
        return SpeedAccepterAgent(corpus, seed, spec.delay_s)
    if spec.kind == "estopper":
        return EStopperAgent(spec.threshold_n)
    raise ValueError(f"unknown agent kind {spec.kind!r}")
