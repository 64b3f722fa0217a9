"""Telemetry tests: recording, the two log dialects, episodes, summaries."""

from datetime import datetime

import pytest

from dressim.control import episode_tracker
from dressim.telemetry import (
    ControlEvent,
    Dialect,
    EventKind,
    EventLog,
    TrialSummary,
    export,
    export_jsonl,
    export_summary_csv,
    import_jsonl,
    render_log,
    summarize,
)

E = EventKind


def ev(t, kind, force=None, **data):
    return ControlEvent(t=t, kind=kind, force=force, data=data)


def ts(stamp: str) -> float:
    """Seconds since 10:36:00 on the reference day."""
    ref = datetime.fromisoformat("2024-03-27 10:36:00")
    return (datetime.fromisoformat(f"2024-03-27 {stamp}") - ref).total_seconds()


def autonomous_reference_log() -> EventLog:
    """The two-episode autonomous recovery sequence with source timestamps."""
    log = EventLog(epoch=datetime(2024, 3, 27, 10, 36, 0))
    rows = [
        (ts("10:36:09.778002"), E.POTENTIAL_SNAG_DETECTED, 15.080502443012636, {}),
        (ts("10:36:12.954141"), E.CROSS35, 35.451165684906286, {}),
        (ts("10:36:12.996628"), E.ROBOT_STOPPED, None, {}),
        (ts("10:36:13.315910"), E.COMPLIANCE_ENTERED, None, {}),
        (ts("10:36:14.327026"), E.RECOVERY_ENTERED, None, {}),
        (
            ts("10:36:25.022436"),
            E.SNAG_RESOLVED,
            10.705841635104898,
            {"duration": 15.243930816, "outcome": "auto"},
        ),
        (ts("10:36:35.174527"), E.POTENTIAL_SNAG_DETECTED, 17.81032169127244, {}),
        (ts("10:36:42.769093"), E.CROSS35, 35.48756007542283, {}),
        (ts("10:36:42.835616"), E.ROBOT_STOPPED, None, {}),
        (ts("10:36:43.142604"), E.COMPLIANCE_ENTERED, None, {}),
        (ts("10:36:44.201946"), E.RECOVERY_ENTERED, None, {}),
        (ts("10:36:51.009772"), E.CROSS35, 35.07581471370306, {}),
        (ts("10:36:51.014151"), E.ROBOT_STOPPED, None, {}),
        (ts("10:36:51.333567"), E.COMPLIANCE_ENTERED, None, {}),
        (ts("10:36:52.345463"), E.RECOVERY_ENTERED, None, {}),
        (ts("10:36:59.753645"), E.CROSS35, 35.00834040081591, {}),
        (ts("10:36:59.758340"), E.ROBOT_STOPPED, None, {}),
        (ts("10:37:00.043740"), E.COMPLIANCE_ENTERED, None, {}),
        (ts("10:37:01.048447"), E.RECOVERY_ENTERED, None, {}),
        (ts("10:37:09.061559"), E.CROSS35, 35.24533138737791, {}),
        (ts("10:37:09.202167"), E.ROBOT_STOPPED, None, {}),
        (ts("10:37:09.382041"), E.COMPLIANCE_ENTERED, None, {}),
        (ts("10:37:10.495180"), E.RECOVERY_ENTERED, None, {}),
        (
            ts("10:37:15.965006"),
            E.SNAG_RESOLVED,
            22.279617260547393,
            {"duration": 40.790181398, "outcome": "timeout"},
        ),
        (ts("10:37:16.011521"), E.GRIPPER_OPENED, None, {"reason": "timeout"}),
        (ts("10:37:22.477492"), E.ROBOT_STOPPED, None, {}),
        (ts("10:37:22.478421"), E.MOVED_TO_SAFE, None, {}),
        (ts("10:37:49.504171"), E.MOVED_HOME, None, {}),
    ]
    for t, kind, force, data in rows:
        log.record(ControlEvent(t=t, kind=kind, force=force, data=data))
    return log


AUTONOMOUS_REFERENCE_TEXT = """\
Potential Snag. Detected 15N at: 2024-03-27 10:36:09.778002 with force: 15.080502443012636
35N crossed at: 2024-03-27 10:36:12.954141 with force: 35.451165684906286
Robot stopped at: 2024-03-27 10:36:12.996628
Switched to compliance mode at: 2024-03-27 10:36:13.315910
Switched back to recovery mode at: 2024-03-27 10:36:14.327026
Snag recovered at: 2024-03-27 10:36:25.022436 with force: 10.705841635104898
with recovery duration: [15.243930816]

Potential Snag. Detected 15N at: 2024-03-27 10:36:35.174527 with force: 17.81032169127244
35N crossed at: 2024-03-27 10:36:42.769093 with force: 35.48756007542283
Robot stopped at: 2024-03-27 10:36:42.835616
Switched to compliance mode at: 2024-03-27 10:36:43.142604
Switched back to recovery mode at: 2024-03-27 10:36:44.201946
35N crossed at: 2024-03-27 10:36:51.009772 with force: 35.07581471370306
Robot stopped at: 2024-03-27 10:36:51.014151
Switched to compliance mode at: 2024-03-27 10:36:51.333567
Switched back to recovery mode at: 2024-03-27 10:36:52.345463
35N crossed at: 2024-03-27 10:36:59.753645 with force: 35.00834040081591
Robot stopped at: 2024-03-27 10:36:59.758340
Switched to compliance mode at: 2024-03-27 10:37:00.043740
Switched back to recovery mode at: 2024-03-27 10:37:01.048447
35N crossed at: 2024-03-27 10:37:09.061559 with force: 35.24533138737791
Robot stopped at: 2024-03-27 10:37:09.202167
Switched to compliance mode at: 2024-03-27 10:37:09.382041
Switched back to recovery mode at: 2024-03-27 10:37:10.495180
Snag recovered at: 2024-03-27 10:37:15.965006 with force: 22.279617260547393
with recovery duration: [15.243930816, 40.790181398]
Time crossed 40 seconds. Gripper opened at: 2024-03-27 10:37:16.011521
Robot stopped at: 2024-03-27 10:37:22.477492
Robot started moving to safe position at: 2024-03-27 10:37:22.478421
Robot started moving to final home position at: 2024-03-27 10:37:49.504171
"""


def test_autonomous_dialect_reproduces_reference_structure():
    log = autonomous_reference_log()
    assert render_log(log, Dialect.AUTONOMOUS) == AUTONOMOUS_REFERENCE_TEXT


def test_human_dialect_line_structure():
    log = EventLog(epoch=datetime(2024, 3, 27, 14, 29, 0))
    rows = [
        ev(53.417, E.POTENTIAL_SNAG_DETECTED, 15.18213),
        ev(60.987936, E.CROSS35, 35.0299),
        ev(60.992, E.ROBOT_STOPPED),
        ev(61.407, E.COMPLIANCE_ENTERED),
        ev(61.4075, E.USER_PROMPTED, text="I have detected a snag. Would you like to assist?"),
        ev(66.4078, E.USER_RESPONDED, text="Yes, I will adjust the garment.", intent="snag_assist"),
        ev(66.41, E.USER_RESPONDED, text="done", intent="confirm_fixed"),
        ev(66.415, E.TRAJECTORY_MODE_ENTERED),
        ev(66.4151, E.SNAG_RESOLVED, 1.7847, duration=3.0211, outcome="user"),
    ]
    for e in rows:
        log.record(e)
    text = render_log(log, Dialect.HUMAN_INTERVENTION)
    assert text == (
        "Potential Snag Detected at: 14:29:53.417000 | Force: 15.18213N\n"
        "35N crossed at: 14:30:00.987936 | Force: 35.0299N\n"
        "Robot Paused at: 14:30:00.992000\n"
        "Switched to Compliance Mode at: 14:30:01.407000\n"
        'User Prompt: "I have detected a snag. Would you like to assist?"\n'
        'User Response: "Yes, I will adjust the garment."\n'
        "Fixed Snag. Resume Dressing.\n"
        "Switched back to Trajectory Mode at: 14:30:06.415000\n"
        "Snag Resolved at: 14:30:06.415100 | Force: 1.7847N\n"
        "Recovery Duration: 3.0211s\n"
    )


def test_empty_log_renders_empty():
    log = EventLog()
    assert render_log(log, Dialect.AUTONOMOUS) == ""
    assert render_log(log, Dialect.HUMAN_INTERVENTION) == ""


def test_unknown_kind_renders_comment_line():
    log = EventLog()
    log.record(ev(1.0, E.WAYPOINT_REACHED, label="LWRS"))
    text = render_log(log, Dialect.AUTONOMOUS)
    assert text.startswith("# WaypointReached")


def test_record_rejects_time_regression():
    log = EventLog()
    log.record(ev(1.0, E.CROSS35, 36.0))
    with pytest.raises(ValueError, match="regression"):
        log.record(ev(0.99, E.ROBOT_STOPPED))


def test_record_keeps_equal_times_in_arrival_order():
    log = EventLog()
    log.record(ev(1.0, E.CROSS35, 36.0))
    log.record(ev(1.0, E.ROBOT_STOPPED))
    assert [e.kind for e in log.events] == [E.CROSS35, E.ROBOT_STOPPED]


# ----------------------------------------------------------------------
# episodes


def test_episode_tracker_reference_durations():
    episodes = episode_tracker(autonomous_reference_log().events)
    assert len(episodes) == 2
    first, second = episodes
    assert first.duration == pytest.approx(15.243930816)
    assert first.outcome == "ResolvedAutonomously"
    assert first.attempts == 1
    assert second.duration == pytest.approx(40.790181398)
    assert second.outcome == "Timeout"
    assert second.attempts == 4
    assert second.cross35_t is not None


def test_episode_tracker_potential_only():
    events = [
        ev(1.0, E.POTENTIAL_SNAG_DETECTED, 15.4),
        ev(2.0, E.SNAG_RESOLVED, 13.2, duration=1.0, outcome="potential_only"),
        ev(3.0, E.TRIAL_COMPLETED),
    ]
    episodes = episode_tracker(events)
    assert len(episodes) == 1
    assert episodes[0].outcome == "PotentialOnly"
    assert episodes[0].cross35_t is None


def test_episode_tracker_rejects_disorder():
    events = [ev(2.0, E.POTENTIAL_SNAG_DETECTED, 16.0), ev(1.0, E.CROSS35, 36.0)]
    with pytest.raises(ValueError, match="ordered"):
        episode_tracker(events)


def test_episode_tracker_closes_on_estop():
    events = [
        ev(1.0, E.POTENTIAL_SNAG_DETECTED, 16.0),
        ev(2.0, E.CROSS35, 36.0),
        ev(3.0, E.EMERGENCY_STOP, 47.0, peak=47.0),
    ]
    episodes = episode_tracker(events)
    assert episodes[0].outcome == "Aborted"
    assert episodes[0].peak_force == 47.0


# ----------------------------------------------------------------------
# summaries


def terminal_log(events):
    log = EventLog()
    for e in events:
        log.record(e)
    return log


def test_summarize_counts_and_ranges():
    log = terminal_log(
        [
            ev(0.0, E.WAYPOINT_REACHED, label="HAND"),
            ev(1.0, E.POTENTIAL_SNAG_DETECTED, 15.5),
            ev(2.0, E.SNAG_RESOLVED, 13.0, duration=1.0, outcome="potential_only", peak=21.0),
            ev(3.0, E.POTENTIAL_SNAG_DETECTED, 15.2),
            ev(4.0, E.CROSS35, 35.4),
            ev(5.0, E.RECOVERY_ENTERED),
            ev(6.0, E.SNAG_RESOLVED, 12.0, duration=3.0, outcome="auto", peak=35.4),
            ev(7.0, E.WAYPOINT_REACHED, label="LWRS"),
            ev(8.0, E.TRIAL_COMPLETED),
        ]
    )
    s = summarize([log])
    assert s.trials == 1
    assert s.snags == 2
    assert s.potential_snags == 1
    assert s.escalated_snags == 1
    assert s.resolved == 1
    assert s.aborts == 0
    assert s.attempts == 1
    assert s.force_range == (21.0, 35.4)
    assert s.time_range == (1.0, 3.0)
    assert s.pauses["trajectory"] == 2
    assert s.waypoint_reached == "LWRS"
    assert s.status == "Completed"


def test_summarize_rejects_unterminated_log():
    log = terminal_log([ev(1.0, E.POTENTIAL_SNAG_DETECTED, 16.0)])
    with pytest.raises(ValueError, match="unterminated"):
        summarize([log])


def test_summarize_merge_equals_concat():
    def make(n, t0):
        events = []
        t = t0
        for i in range(n):
            events.append(ev(t, E.POTENTIAL_SNAG_DETECTED, 15.0 + i))
            events.append(
                ev(t + 0.5, E.SNAG_RESOLVED, 10.0, duration=0.5, outcome="potential_only", peak=16.0 + i)
            )
            t += 1.0
        events.append(ev(t, E.TRIAL_COMPLETED))
        return terminal_log(events)

    logs = [make(3, 0.0), make(5, 0.0), make(2, 0.0)]
    merged = summarize(logs)
    stepwise = TrialSummary()
    for log in logs:
        stepwise.merge(summarize([log]))
    assert merged.snags == stepwise.snags == 10
    assert merged.force_range == stepwise.force_range
    assert merged.time_range == stepwise.time_range
    assert merged.trials == stepwise.trials == 3


def test_summarize_streaming_matches_naive_on_large_log():
    events = []
    t = 0.0
    n = 20_000  # 5 events per episode -> 1e5 events
    for i in range(n):
        events.append(ev(t, E.POTENTIAL_SNAG_DETECTED, 16.0))
        events.append(ev(t + 0.1, E.CROSS35, 36.0))
        events.append(ev(t + 0.2, E.RECOVERY_ENTERED))
        events.append(ev(t + 0.3, E.SNAG_RESOLVED, 10.0, duration=0.3, outcome="auto", peak=37.0))
        events.append(ev(t + 0.4, E.WAYPOINT_REACHED, label="LWRS"))
        t += 1.0
    events.append(ev(t, E.TRIAL_COMPLETED))
    log = terminal_log(events)
    s = summarize([log])
    # naive recount
    assert s.snags == sum(1 for e in log.events if e.kind == E.POTENTIAL_SNAG_DETECTED)
    assert s.escalated_snags == sum(1 for e in log.events if e.kind == E.CROSS35)
    assert s.attempts == sum(1 for e in log.events if e.kind == E.RECOVERY_ENTERED)
    assert s.resolved == n


# ----------------------------------------------------------------------
# exports


def test_jsonl_round_trip():
    log = autonomous_reference_log()
    payload = export_jsonl(log)
    back = import_jsonl(payload)
    assert back.epoch == log.epoch
    assert back.events == log.events
    assert export_jsonl(back) == payload


def test_import_rejects_bad_version():
    with pytest.raises(ValueError, match="version"):
        import_jsonl(b'{"v": 99, "epoch": "2024-03-27T10:36:00"}\n')


def test_csv_header_and_breakdown():
    log = autonomous_reference_log()
    completed = EventLog(epoch=log.epoch)
    for e in log.events:
        completed.record(e)
    completed.record(ev(log.events[-1].t + 1.0, E.TRIAL_ABORTED, reason="timeout"))
    csv_bytes = export_summary_csv(summarize([completed]))
    lines = csv_bytes.decode().splitlines()
    assert lines[0] == "Trials,Snags,Pot. Snags,Esc. Snags,Resolved,Aborts,Attempts,Force (N),Time (s)"
    assert any(row.startswith("Potential Snags") for row in lines)
    assert any(row.startswith("Esc. Snags (Resolved)") for row in lines)
    assert any(row.startswith("Aborted Tasks") for row in lines)


def test_export_dispatch():
    log = autonomous_reference_log()
    assert export(log, "text-auto") == render_log(log, Dialect.AUTONOMOUS).encode()
    assert export(log, "jsonl") == export_jsonl(log)
    with pytest.raises(ValueError):
        export(log, "parquet")
