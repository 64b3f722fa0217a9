"""Text-to-intent classification and the dialogue manager.

Classification is a transparent token-overlap scorer over a small example
corpus, so every decision is exactly reproducible. The dialogue manager owns
the single active prompt, forwards allowed intents to the controller, and
keeps the full transcript.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import yaml


class Intent(Enum):
    SNAG_ASSIST = "snag_assist"
    CANNOT_RESOLVE = "cannot_resolve"
    CONFIRM_FIXED = "confirm_fixed"
    ABORT_TASK = "abort_task"
    MORE_GENTLE = "more_gentle"
    SPEED_OK = "speed_ok"
    REPORT_PAIN = "report_pain"
    PAUSE_DRESSING = "pause_dressing"
    RESUME_DRESSING = "resume_dressing"
    START_DRESSING = "start_dressing"
    EMERGENCY_STOP = "emergency_stop"
    AUTONOMOUS_RECOVER = "autonomous_recover"
    UNKNOWN = "unknown"


# Forwarded regardless of the active prompt.
INTERRUPT_INTENTS = frozenset(
    {Intent.REPORT_PAIN, Intent.PAUSE_DRESSING, Intent.EMERGENCY_STOP}
)

SCORE_THRESHOLD = 0.5

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> frozenset[str]:
    return frozenset(_TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class Corpus:
    """Per-intent example utterances, in declaration order (used for ties)."""

    examples: tuple[tuple[Intent, tuple[str, ...]], ...]

    def __post_init__(self) -> None:
        seen: dict[str, Intent] = {}
        for intent, utterances in self.examples:
            if len(utterances) < 3:
                raise ValueError(f"intent {intent.value} needs at least 3 examples")
            for utt in utterances:
                key = " ".join(sorted(tokenize(utt)))
                if key in seen and seen[key] is not intent:
                    raise ValueError(f"duplicate utterance across intents: {utt!r}")
                seen[key] = intent


def load_corpus(path: str | None = None) -> Corpus:
    if path is None:
        text = resources.files("dressim.data").joinpath("corpus.yml").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    doc = yaml.safe_load(text)
    blocks = []
    for block in doc["nlu"]:
        intent = Intent(block["intent"])
        utterances = tuple(
            line.strip()[2:].strip()
            for line in block["examples"].splitlines()
            if line.strip().startswith("- ")
        )
        blocks.append((intent, utterances))
    return Corpus(tuple(blocks))


def classify(text: str, corpus: Corpus) -> tuple[Intent, float]:
    """Best-overlap intent for ``text``; UNKNOWN below the score threshold.

    Score per example is |tokens(text) & tokens(example)| / |tokens(example)|,
    maximized over that intent's examples. Ties go to declaration order.
    """
    if not text or not text.strip():
        raise ValueError("empty text")
    tokens = tokenize(text)
    best_intent = Intent.UNKNOWN
    best_score = 0.0
    for intent, utterances in corpus.examples:
        score = 0.0
        for utt in utterances:
            ex_tokens = tokenize(utt)
            if not ex_tokens:
                continue
            score = max(score, len(tokens & ex_tokens) / len(ex_tokens))
        if score > best_score:
            best_intent, best_score = intent, score
    if best_score < SCORE_THRESHOLD:
        return Intent.UNKNOWN, best_score
    return best_intent, best_score


# ----------------------------------------------------------------------
# prompts


class PromptKind(Enum):
    SNAG_ASSIST = "snag_assist"
    SNAG_ESCALATE = "snag_escalate"
    PAIN_CHOICE = "pain_choice"
    SPEED_CHECK = "speed_check"
    PAIN_ABORT = "pain_abort"
    PAUSED = "paused"
    ABORTED = "aborted"


@dataclass(frozen=True)
class Prompt:
    kind: PromptKind
    text: str
    allowed_intents: frozenset[Intent]
    # Intents that forward without closing the prompt (an answer that opens a
    # sub-dialogue, e.g. agreeing to assist and later confirming the fix).
    sticky_intents: frozenset[Intent] = frozenset()

    def __post_init__(self) -> None:
        if not self.allowed_intents:
            raise ValueError("prompt needs at least one allowed intent")


_PROMPTS: dict[PromptKind, Prompt] = {
    PromptKind.SNAG_ASSIST: Prompt(
        PromptKind.SNAG_ASSIST,
        "I have detected a snag. Do you want to assist me by adjusting the garment "
        "or would you like me to abort the dressing?",
        frozenset(
            {Intent.SNAG_ASSIST, Intent.CANNOT_RESOLVE, Intent.ABORT_TASK, Intent.CONFIRM_FIXED}
        ),
        sticky_intents=frozenset({Intent.SNAG_ASSIST}),
    ),
    PromptKind.SNAG_ESCALATE: Prompt(
        PromptKind.SNAG_ESCALATE,
        "The garment is stuck. Would you like me to abort the task or attempt to "
        "resolve it autonomously?",
        frozenset({Intent.ABORT_TASK, Intent.AUTONOMOUS_RECOVER}),
    ),
    PromptKind.PAIN_CHOICE: Prompt(
        PromptKind.PAIN_CHOICE,
        "It looks like you are in pain. Would you like me to continue with the "
        "dressing but be more gentle, or abort the dressing?",
        frozenset({Intent.MORE_GENTLE, Intent.ABORT_TASK}),
    ),
    PromptKind.SPEED_CHECK: Prompt(
        PromptKind.SPEED_CHECK,
        "I have reduced the speed. Please let me know if this is better or if you "
        "would like me to stop.",
        frozenset({Intent.SPEED_OK, Intent.MORE_GENTLE, Intent.ABORT_TASK}),
    ),
    PromptKind.PAIN_ABORT: Prompt(
        PromptKind.PAIN_ABORT,
        "It seems you are in a lot of pain. I will abort the task and call for "
        "assistance. Please take care.",
        frozenset({Intent.EMERGENCY_STOP}),
    ),
    PromptKind.PAUSED: Prompt(
        PromptKind.PAUSED,
        "I have paused the dressing. Let me know when I should resume.",
        frozenset({Intent.RESUME_DRESSING}),
    ),
    PromptKind.ABORTED: Prompt(
        PromptKind.ABORTED,
        "Aborting the dressing task. I will release the garment and return to my "
        "home position.",
        frozenset({Intent.EMERGENCY_STOP}),
    ),
}


def render_prompt(kind: PromptKind) -> Prompt:
    return _PROMPTS[kind]


# ----------------------------------------------------------------------
# dialogue state


@dataclass
class DialogueState:
    active_prompt: Prompt | None = None
    transcript: list[tuple[str, str, float]] = field(default_factory=list)


REPROMPT_REPLY = "Sorry, I did not understand that."


class DialogueManager:
    """Routes user text to controller intents and keeps the transcript."""

    def __init__(self, corpus: Corpus | None = None):
        self.corpus = corpus or load_corpus()
        self.state = DialogueState()

    @property
    def active_prompt(self) -> Prompt | None:
        return self.state.active_prompt

    def present(self, prompt: Prompt, t: float) -> None:
        self.state.active_prompt = prompt
        self.state.transcript.append(("robot", prompt.text, t))

    def say_system(self, text: str, t: float) -> None:
        self.state.transcript.append(("robot", text, t))

    def dispatch(self, text: str, t: float) -> tuple[Intent | None, str | None]:
        """Classify user text; returns (intent to forward, robot reply).

        Interrupt intents always forward. Prompt answers forward only when
        allowed by the active prompt, which they close. Anything else gets a
        re-prompt reply and, while a prompt is open, forwards UNKNOWN so the
        controller can count failed exchanges.
        """
        self.state.transcript.append(("user", text, t))
        intent, _score = classify(text, self.corpus)
        prompt = self.state.active_prompt
        if intent in INTERRUPT_INTENTS:
            return intent, None
        if prompt is not None and intent in prompt.allowed_intents:
            if intent not in prompt.sticky_intents:
                self.state.active_prompt = None
            return intent, None
        if prompt is not None:
            self.state.transcript.append(("robot", REPROMPT_REPLY, t))
            return Intent.UNKNOWN, REPROMPT_REPLY
        self.state.transcript.append(("robot", REPROMPT_REPLY, t))
        return None, REPROMPT_REPLY
