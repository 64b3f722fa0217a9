#!/usr/bin/env python3
"""Calibrate the bundled demo scenario's snag release timings.

Adjusts each snag's release_after_retract until the two episode durations
land on the reference values, then prints the values to paste into
golden_scenario.json.
"""

import json
from pathlib import Path

from dressim.harness import GOLDEN_DURATIONS, GOLDEN_PLAN_PATH
from dressim.scenario import load_plan
from dressim.telemetry import EventKind
from dressim.harness import run_trial

SCENARIO_PATH = Path(__file__).parent.parent / "src/dressim/data/golden_scenario.json"


def episode_durations(t1: float, t2: float) -> list[float]:
    doc = json.loads(SCENARIO_PATH.read_text())
    doc["snags"][0]["release_after_retract"] = t1
    doc["snags"][1]["release_after_retract"] = t2
    SCENARIO_PATH.write_text(json.dumps(doc, indent=2) + "\n")
    plan = load_plan(GOLDEN_PLAN_PATH)
    result = run_trial(plan, 0)
    return [
        ev.data["duration"]
        for ev in result.log.events
        if ev.kind == EventKind.SNAG_RESOLVED
    ]


def tune(index: int, t_other: float, start: float, target: float) -> float:
    value = start
    for _ in range(12):
        pair = (value, t_other) if index == 0 else (t_other, value)
        durs = episode_durations(*pair)
        if len(durs) <= index:
            raise SystemExit(f"episode {index} missing (durations={durs})")
        err = durs[index] - target
        if abs(err) <= 0.005:
            print(f"  episode {index}: duration={durs[index]:.6f} (err {err:+.4f})")
            return value
        value -= err
    raise SystemExit(f"failed to converge on episode {index}")


def main() -> None:
    doc = json.loads(SCENARIO_PATH.read_text())
    t1 = doc["snags"][0]["release_after_retract"]
    t2 = doc["snags"][1]["release_after_retract"]
    print("tuning episode 1 ...")
    t1 = tune(0, t2, t1, GOLDEN_DURATIONS[0])
    print("tuning episode 2 ...")
    t2 = tune(1, t1, t2, GOLDEN_DURATIONS[1])
    durs = episode_durations(t1, t2)
    print(f"final: release_after_retract = {t1:.4f}, {t2:.4f}; durations = {durs}")


if __name__ == "__main__":
    main()
