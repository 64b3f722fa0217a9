"""Acceptance gate: one test per release criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Every tolerance is pinned here; nothing is deferred to calibration.
"""

import re
import time
from pathlib import Path

from dressim.control import InteractionState, classify_force
from dressim.harness import (
    GOLDEN_DURATIONS,
    GOLDEN_FIXTURE_PATH,
    GOLDEN_TOLERANCE,
    replay_golden,
    run_batch,
    run_trial,
)
from dressim.intent import Intent, classify, load_corpus
from dressim.scenario import load_plan
from dressim.telemetry import Dialect, EventKind, export_jsonl, render_log

from .fuzz_support import run_safety_suite
from .test_intent import LISTING_EXAMPLES, PARAPHRASES, reference_classify

E = EventKind
PLANS = Path(__file__).parent.parent / "src/dressim/data/plans"


def report(name: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    print(f"{tag}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_criterion_threshold_bands():
    t0 = time.monotonic()
    for i in range(100_001):
        f = i / 1000.0
        if f <= 15.0:
            want = InteractionState.NORMAL
        elif f <= 35.0:
            want = InteractionState.POTENTIAL_SNAG
        else:
            want = InteractionState.HAZARDOUS
        assert classify_force(f) is want, f
    elapsed = time.monotonic() - t0
    ok = (
        classify_force(15.0) is InteractionState.NORMAL
        and classify_force(35.0) is InteractionState.POTENTIAL_SNAG
        and classify_force(35.001) is InteractionState.HAZARDOUS
        and elapsed < 1.0
    )
    report("threshold bands (0.001 N sweep, boundaries, <1 s)", ok, f"{elapsed:.2f}s")


def test_criterion_golden_autonomous_trace():
    t0 = time.monotonic()
    verdict = replay_golden()
    elapsed = time.monotonic() - t0
    durations = [
        ev.data["duration"]
        for ev in verdict.result.log.events
        if ev.kind == E.SNAG_RESOLVED
    ]
    detail = (
        f"durations {durations[0]:.4f}/{durations[1]:.4f} vs "
        f"{GOLDEN_DURATIONS[0]}/{GOLDEN_DURATIONS[1]} ±{GOLDEN_TOLERANCE}, {elapsed:.2f}s"
    )
    ok = verdict.passed and elapsed < 5.0
    ok = ok and all(
        abs(got - want) <= GOLDEN_TOLERANCE
        for got, want in zip(durations, GOLDEN_DURATIONS)
    )
    report("golden autonomous trace (order + durations)", ok, detail)


SAFETY_KINDS = {
    E.POTENTIAL_SNAG_DETECTED,
    E.CROSS35,
    E.ROBOT_STOPPED,
    E.COMPLIANCE_ENTERED,
    E.RECOVERY_ENTERED,
    E.GRIPPER_OPENED,
    E.MOVED_TO_SAFE,
    E.MOVED_HOME,
    E.EMERGENCY_STOP,
    E.TRIAL_ABORTED,
}

TABLE_ORDER = [
    E.POTENTIAL_SNAG_DETECTED,
    E.CROSS35,
    E.ROBOT_STOPPED,
    E.COMPLIANCE_ENTERED,
    E.USER_PROMPTED,
    E.USER_RESPONDED,
    E.TRAJECTORY_MODE_ENTERED,
]


def test_criterion_human_intervention_sequence():
    result = run_trial(load_plan(PLANS / "human_snag.json"), 0)
    kinds = [ev.kind for ev in result.log.events]
    safety = [k for k in kinds if k in SAFETY_KINDS]
    ok = safety == [
        E.POTENTIAL_SNAG_DETECTED,
        E.CROSS35,
        E.ROBOT_STOPPED,
        E.COMPLIANCE_ENTERED,
    ]
    seen = [k for k in kinds if k in set(TABLE_ORDER)]
    # the user answers twice: assist, then the confirmation that resumes
    ok = ok and seen == TABLE_ORDER[:5] + [E.USER_RESPONDED, E.USER_RESPONDED, E.TRAJECTORY_MODE_ENTERED]
    report(
        "human-intervention seven-event order, zero extra safety events",
        ok,
        "->".join(k.value for k in seen),
    )


def test_criterion_pain_trials():
    expectations = [
        ("pain_trial_1", (3, 1, 2, "LELB", "Aborted")),
        ("pain_trial_2", (3, 1, 2, "LELB", "Aborted")),
        ("pain_trial_3", (4, 2, 2, "LSHO", "Completed")),
    ]
    rows = []
    ok = True
    for name, want in expectations:
        res = run_trial(load_plan(PLANS / f"{name}.json"), 0)
        got = (
            res.summary.pauses["trajectory"],
            res.summary.pauses["pain"],
            res.summary.pauses["speed_check"],
            res.summary.waypoint_reached,
            res.status,
        )
        rows.append(f"{name}: {got}")
        ok = ok and got == want
    report("pain trials reproduce published rows", ok, "; ".join(rows))


def test_criterion_baseline_band():
    merged, results = run_batch(load_plan(PLANS / "baseline.json"))
    peaks = []
    ok = True
    for res in results:
        kinds = [ev.kind for ev in res.log.events]
        peak = max(s.magnitude for s in res.samples)
        peaks.append(round(peak, 1))
        ok = ok and res.status == "EmergencyStop"
        ok = ok and 40.0 <= peak <= 60.0
        ok = ok and E.COMPLIANCE_ENTERED not in kinds
        ok = ok and E.RECOVERY_ENTERED not in kinds
        ok = ok and E.USER_PROMPTED not in kinds
    report(
        "baseline peaks in [40, 60] N before e-stop, zero interventions",
        ok,
        f"peaks {peaks}",
    )


def test_criterion_safety_property_suite():
    t0 = time.monotonic()
    stats = run_safety_suite(1000, master_seed=2024)
    elapsed = time.monotonic() - t0
    ok = stats.trials == 1000 and elapsed < 60.0 and stats.timeout_aborts > 0
    report(
        "safety property suite (1000 fuzzed scenarios)",
        ok,
        f"{elapsed:.1f}s, {stats.hazardous_ticks} hazardous ticks, "
        f"{stats.timeout_aborts} timeout aborts, variants {stats.by_variant}",
    )


def test_criterion_intent_corpus():
    corpus = load_corpus()
    listing_ok = all(
        classify(text, corpus)[0] is want for text, want in LISTING_EXAMPLES
    )
    correct = 0
    agree = True
    for text, want in PARAPHRASES:
        got, _ = classify(text, corpus)
        agree = agree and got is reference_classify(text, corpus)
        if got is want and got is not Intent.UNKNOWN:
            correct += 1
    ok = listing_ok and agree and correct >= 27
    report(
        "intent corpus (published examples + 30-paraphrase set)",
        ok,
        f"paraphrases {correct}/30 correct",
    )


def test_criterion_determinism(tmp_path):
    checked = []
    ok = True
    for name in ("human_snag", "pain_trial_2", "autonomous_golden", "baseline"):
        plan = load_plan(PLANS / f"{name}.json")
        a = [export_jsonl(run_trial(plan, i).log) for i in range(plan.repetitions)]
        b = [export_jsonl(run_trial(plan, i).log) for i in range(plan.repetitions)]
        ok = ok and a == b
        checked.append(name)
    report("determinism: byte-identical JSONL per seed", ok, ", ".join(checked))


TS_RE = re.compile(r"\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}\.\d{6}")


def test_criterion_log_dialect_fidelity():
    verdict = replay_golden()
    rendered = render_log(verdict.result.log, Dialect.AUTONOMOUS)
    fixture = GOLDEN_FIXTURE_PATH.read_text()
    got = [TS_RE.sub("<ts>", line) for line in rendered.splitlines()]
    want = [TS_RE.sub("<ts>", line) for line in fixture.splitlines()]
    ok = got == want
    detail = f"{len(got)} lines"
    if not ok:
        for i, (g, w) in enumerate(zip(got, want)):
            if g != w:
                detail = f"first divergence at line {i}: {g!r} != {w!r}"
                break
    report("autonomous dialect matches shipped golden fixture", ok, detail)
