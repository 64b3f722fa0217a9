#!/usr/bin/env python3
"""Generate the multi-trial batch plan files.

Lays out per-trial snag sets so the batch totals match the target counts:
  * human_batch: 12 trials, 44 potential + 31 escalated snags,
    25 resolved by the user, 6 user-requested aborts (abort snag last).
  * autonomous_batch: 9 trials, 16 potential + 23 escalated snags,
    20 recovered by retraction, 3 timeout aborts (timeout snag last).
"""

import json
from pathlib import Path

PLANS = Path(__file__).parent.parent / "src/dressim/data/plans"

SLOPE = 500.0


def potential(idx: int, segment: str, progress: float) -> dict:
    return {
        "id": f"pot-{idx}",
        "segment": segment,
        "progress": progress,
        "ramp_slope": SLOPE,
        "hold_force": 26.0,
        "extent_m": 0.04,
    }


def assistable(idx: int, segment: str, progress: float) -> dict:
    return {
        "id": f"esc-{idx}",
        "segment": segment,
        "progress": progress,
        "ramp_slope": SLOPE,
        "hold_force": 45.0,
        "resolvable_by_assist": True,
        "assist_delay": 0.8,
    }


def retractable(idx: int, segment: str, progress: float) -> dict:
    return {
        "id": f"esc-{idx}",
        "segment": segment,
        "progress": progress,
        "ramp_slope": SLOPE,
        "hold_force": 45.0,
        "resolvable_by_retraction": True,
        "release_after_retract": 0.8,
    }


def sticky(idx: int, segment: str, progress: float) -> dict:
    return {
        "id": f"stuck-{idx}",
        "segment": segment,
        "progress": progress,
        "ramp_slope": SLOPE,
        "hold_force": 70.0,
    }


# Trigger slots along the two long segments, spaced so one episode finishes
# well before the next trigger.
SLOTS = [
    ("LWRS", 0.10), ("LWRS", 0.40), ("LWRS", 0.70),
    ("LELB", 0.05), ("LELB", 0.30), ("LELB", 0.55), ("LELB", 0.78),
]

# Half again the desk-scale arm: room for up to seven episodes per trial.
WAYPOINTS = [
    {"label": "HAND", "position": [0.0, 0.0, 0.0]},
    {"label": "LWRS", "position": [0.15, 0.0, 0.03]},
    {"label": "LELB", "position": [0.525, 0.0, 0.15]},
    {"label": "LSHO", "position": [0.9, 0.0, 0.375]},
]


def lay_out(counts: list[tuple[str, int, int]], make_escalated, final_kind=None) -> list[list[dict]]:
    """counts: per trial (mode, n_potential, n_escalated).

    Potentials and escalated snags interleave along the trajectory; in abort
    trials the terminal escalated snag occupies the last used slot so every
    injected snag actually occurs before the trial ends.
    """
    sets = []
    uid = 0
    for mode, n_pot, n_esc in counts:
        pots, escs = ["pot"] * n_pot, ["esc"] * n_esc
        order: list[str] = []
        terminal = mode == "abort"
        if terminal:
            escs.pop()
        while pots or escs:
            if pots:
                order.append(pots.pop())
            if escs:
                order.append(escs.pop())
        if terminal:
            order.append("esc-final")
        if len(order) > len(SLOTS):
            raise SystemExit(f"trial needs {len(order)} slots, only {len(SLOTS)} defined")
        snags = []
        for slot, kind in zip(SLOTS, order):
            uid += 1
            if kind == "pot":
                snags.append(potential(uid, *slot))
            elif kind == "esc-final" and final_kind is not None:
                snags.append(final_kind(uid, *slot))
            else:
                snags.append(make_escalated(uid, *slot))
        sets.append(snags)
    return sets


def human_batch() -> dict:
    # 6 completing trials (4 pot + 3 esc) and 6 aborting trials.
    counts = [("ok", 4, 3)] * 6 + [("abort", 4, 3), ("abort", 3, 2), ("abort", 3, 2),
                                   ("abort", 3, 2), ("abort", 3, 2), ("abort", 4, 2)]
    sets = lay_out(counts, assistable)
    overrides = []
    for mode, _pot, n_esc in counts:
        if mode == "ok":
            overrides.append(None)
        else:
            overrides.append(
                {"kind": "assistive", "delay_s": 0.6, "assist_limit": n_esc - 1}
            )
    return {
        "version": 1,
        "name": "human_batch",
        "scenario": {
            "version": 1,
            "seed": 100,
            "waypoints": WAYPOINTS,
            "baseline": {"c0": 3.0, "c1": 2.0, "noise": 0.3},
            "strategy": {"variant": "human_intervention"},
        },
        "agent": {"kind": "assistive", "delay_s": 0.6},
        "repetitions": len(counts),
        "seeds": [100 + i for i in range(len(counts))],
        "snag_sets": sets,
        "agent_overrides": overrides,
        "dialect": "human",
        "max_sim_s": 300.0,
    }


def autonomous_batch() -> dict:
    counts = (
        [("ok", 2, 3)] * 3
        + [("ok", 2, 2), ("ok", 2, 3), ("ok", 2, 3)]
        + [("abort", 2, 2), ("abort", 1, 2), ("abort", 1, 2)]
    )
    sets = lay_out(counts, retractable, final_kind=sticky)
    return {
        "version": 1,
        "name": "autonomous_batch",
        "scenario": {
            "version": 1,
            "seed": 200,
            "waypoints": WAYPOINTS,
            "baseline": {"c0": 3.0, "c1": 2.0, "noise": 0.3},
            "strategy": {"variant": "autonomous"},
        },
        "agent": {"kind": "none"},
        "repetitions": len(counts),
        "seeds": [200 + i for i in range(len(counts))],
        "snag_sets": sets,
        "dialect": "auto",
        "max_sim_s": 300.0,
    }


def main() -> None:
    for doc in (human_batch(), autonomous_batch()):
        path = PLANS / f"{doc['name']}.json"
        path.write_text(json.dumps(doc, indent=2) + "\n")
        n_pot = sum(1 for s in doc["snag_sets"] for x in s if x["id"].startswith("pot"))
        n_esc = sum(1 for s in doc["snag_sets"] for x in s if not x["id"].startswith("pot"))
        print(f"{path.name}: trials={doc['repetitions']} potential={n_pot} escalated={n_esc}")


if __name__ == "__main__":
    main()
