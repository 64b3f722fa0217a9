"""Scenario and trial-plan JSON files.

Both schemas are versioned and strict: unknown keys are rejected so a typo
in a config never silently changes a trial.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .control import StrategyConfig, Variant
from .geometry import Vec3, Waypoint, WaypointLabel
from .world import BaselineParams, GarmentParams, SnagSpec, WorldConfig

SCENARIO_VERSION = 1
PLAN_VERSION = 1


class ScenarioError(ValueError):
    pass


def _take(obj: dict, allowed: dict, where: str) -> dict:
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ScenarioError(f"unknown keys in {where}: {sorted(unknown)}")
    out = dict(allowed)
    out.update(obj)
    missing = [k for k, v in out.items() if v is _REQUIRED]
    if missing:
        raise ScenarioError(f"missing keys in {where}: {missing}")
    return out


_REQUIRED = object()


@dataclass(frozen=True)
class Scenario:
    seed: int
    dt: float
    base_speed: float
    waypoints: tuple[Waypoint, ...]
    baseline: BaselineParams
    garment: GarmentParams
    snags: tuple[SnagSpec, ...]
    pose_noise: float
    waypoint_dwell: float
    epoch: datetime
    strategy: StrategyConfig

    def world_config(self, seed: int | None = None) -> WorldConfig:
        return WorldConfig(
            seed=self.seed if seed is None else seed,
            dt=self.dt,
            base_speed=self.base_speed,
            waypoints=self.waypoints,
            baseline=self.baseline,
            garment=self.garment,
            pose_noise=self.pose_noise,
            waypoint_dwell=self.waypoint_dwell,
        )


def _parse_snag(raw: dict, where: str) -> SnagSpec:
    s = _take(
        raw,
        {
            "id": _REQUIRED,
            "segment": _REQUIRED,
            "progress": _REQUIRED,
            "ramp_slope": _REQUIRED,
            "hold_force": _REQUIRED,
            "resolvable_by_retraction": False,
            "resolvable_by_assist": False,
            "assist_delay": 1.0,
            "release_after_retract": None,
            "extent_m": None,
        },
        where,
    )
    return SnagSpec(
        id=s["id"],
        trigger=(WaypointLabel(s["segment"]), float(s["progress"])),
        ramp_slope=float(s["ramp_slope"]),
        hold_force=float(s["hold_force"]),
        resolvable_by_retraction=bool(s["resolvable_by_retraction"]),
        resolvable_by_assist=bool(s["resolvable_by_assist"]),
        assist_delay=float(s["assist_delay"]),
        release_after_retract=s["release_after_retract"],
        extent_m=s["extent_m"],
    )


def _parse_agent(raw: dict, where: str = "agent") -> AgentSpec:
    a = _take(
        raw,
        {
            "kind": _REQUIRED,
            "delay_s": 1.0,
            "assist_limit": None,
            "escalate_choice": "abort",
            "pain_at": [],
            "gentle_repeats": 0,
            "threshold_n": 45.0,
        },
        where,
    )
    return AgentSpec(
        kind=a["kind"],
        delay_s=float(a["delay_s"]),
        assist_limit=a["assist_limit"],
        escalate_choice=a["escalate_choice"],
        pain_at=tuple((p[0], float(p[1])) for p in a["pain_at"]),
        gentle_repeats=int(a["gentle_repeats"]),
        threshold_n=float(a["threshold_n"]),
    )


def scenario_from_dict(doc: dict) -> Scenario:
    top = _take(
        doc,
        {
            "version": _REQUIRED,
            "seed": 0,
            "dt": 0.01,
            "base_speed": 0.05,
            "epoch": "2024-03-27T10:35:00",
            "waypoints": None,
            "baseline": {},
            "garment": {},
            "snags": [],
            "pose_noise": 0.0,
            "waypoint_dwell": 0.5,
            "strategy": {},
        },
        "scenario",
    )
    if top["version"] != SCENARIO_VERSION:
        raise ScenarioError(f"unsupported scenario version {top['version']}")

    if top["waypoints"] is None:
        from .geometry import DEFAULT_WAYPOINTS

        waypoints = DEFAULT_WAYPOINTS
    else:
        waypoints = tuple(
            Waypoint(WaypointLabel(w["label"]), Vec3(*w["position"]))
            for w in top["waypoints"]
        )

    b = _take(top["baseline"], {"c0": 3.0, "c1": 2.0, "noise": 1.5}, "baseline")
    g = _take(
        top["garment"],
        {"relax_ratio": 0.5, "relax_tau": 0.3, "release_tau": 0.15},
        "garment",
    )

    snags = [_parse_snag(raw, f"snags[{i}]") for i, raw in enumerate(top["snags"])]

    st = _take(
        top["strategy"],
        {
            "variant": "human_intervention",
            "t15": 15.0,
            "t35": 35.0,
            "resolve_threshold": 15.0,
            "timeout": 40.0,
            "compliance_dwell": 1.0,
            "retract_step": 0.02,
            "hysteresis": 1.0,
            "speed_levels": [1.0, 0.6, 0.3],
            "speed_check_delay": 2.0,
            "prompt_timeout": 60.0,
            "reprompt_limit": 2,
            "abort_stop_dwell": 0.5,
            "safe_move_dwell": 2.0,
            "home_move_dwell": 2.0,
        },
        "strategy",
    )
    strategy = StrategyConfig(
        variant=Variant(st["variant"]),
        t15=st["t15"],
        t35=st["t35"],
        resolve_threshold=st["resolve_threshold"],
        timeout=st["timeout"],
        compliance_dwell=st["compliance_dwell"],
        retract_step=st["retract_step"],
        hysteresis=st["hysteresis"],
        speed_levels=tuple(st["speed_levels"]),
        speed_check_delay=st["speed_check_delay"],
        prompt_timeout=st["prompt_timeout"],
        reprompt_limit=st["reprompt_limit"],
        abort_stop_dwell=st["abort_stop_dwell"],
        safe_move_dwell=st["safe_move_dwell"],
        home_move_dwell=st["home_move_dwell"],
    )

    return Scenario(
        seed=int(top["seed"]),
        dt=float(top["dt"]),
        base_speed=float(top["base_speed"]),
        waypoints=waypoints,
        baseline=BaselineParams(c0=b["c0"], c1=b["c1"], noise=b["noise"]),
        garment=GarmentParams(
            relax_ratio=g["relax_ratio"],
            relax_tau=g["relax_tau"],
            release_tau=g["release_tau"],
        ),
        snags=tuple(snags),
        pose_noise=float(top["pose_noise"]),
        waypoint_dwell=float(top["waypoint_dwell"]),
        epoch=datetime.fromisoformat(top["epoch"]),
        strategy=strategy,
    )


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


AGENT_KINDS = {"none", "assistive", "non_assistive", "pain_reporter", "speed_accepter", "estopper"}


@dataclass(frozen=True)
class AgentSpec:
    kind: str
    delay_s: float = 1.0
    assist_limit: int | None = None
    escalate_choice: str = "abort"  # or "autonomous"
    pain_at: tuple[tuple[str, float], ...] = ()
    gentle_repeats: int = 0
    threshold_n: float = 45.0

    def __post_init__(self) -> None:
        if self.kind not in AGENT_KINDS:
            raise ScenarioError(f"unknown agent kind {self.kind!r}")
        if self.delay_s < 0:
            raise ScenarioError("agent delay must be non-negative")
        if self.kind == "estopper" and self.threshold_n <= 35.0:
            raise ScenarioError("estopper threshold must sit above the hazard band")


@dataclass(frozen=True)
class TrialPlan:
    name: str
    scenario: Scenario
    agent: AgentSpec
    repetitions: int
    seeds: tuple[int, ...]
    dialect: str = "auto"
    max_sim_s: float = 600.0
    snag_sets: tuple[tuple[SnagSpec, ...], ...] | None = None
    agent_overrides: tuple[AgentSpec | None, ...] | None = None

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ScenarioError("repetitions must be at least 1")
        if len(self.seeds) != self.repetitions:
            raise ScenarioError("seed schedule length must equal repetitions")
        if self.snag_sets is not None and len(self.snag_sets) != self.repetitions:
            raise ScenarioError("snag_sets length must equal repetitions")
        if self.agent_overrides is not None and len(self.agent_overrides) != self.repetitions:
            raise ScenarioError("agent_overrides length must equal repetitions")

    @property
    def variant(self) -> Variant:
        return self.scenario.strategy.variant

    def scenario_for(self, index: int) -> Scenario:
        from dataclasses import replace

        if self.snag_sets is None:
            return self.scenario
        return replace(self.scenario, snags=self.snag_sets[index])

    def agent_for(self, index: int) -> AgentSpec:
        if self.agent_overrides is None or self.agent_overrides[index] is None:
            return self.agent
        return self.agent_overrides[index]


def plan_from_dict(doc: dict, base_dir: Path | None = None) -> TrialPlan:
    top = _take(
        doc,
        {
            "version": _REQUIRED,
            "name": "trial",
            "scenario": _REQUIRED,
            "variant": None,
            "agent": {"kind": "none"},
            "repetitions": 1,
            "seeds": None,
            "dialect": "auto",
            "max_sim_s": 600.0,
            "snag_sets": None,
            "agent_overrides": None,
        },
        "plan",
    )
    if top["version"] != PLAN_VERSION:
        raise ScenarioError(f"unsupported plan version {top['version']}")
    raw_scenario = top["scenario"]
    if isinstance(raw_scenario, str):
        path = Path(raw_scenario)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        scenario = load_scenario(path)
    else:
        scenario = scenario_from_dict(raw_scenario)
    if top["variant"] is not None:
        from dataclasses import replace

        scenario = replace(
            scenario, strategy=replace(scenario.strategy, variant=Variant(top["variant"]))
        )
    agent = _parse_agent(top["agent"])
    repetitions = int(top["repetitions"])
    seeds = top["seeds"]
    if seeds is None:
        seeds = [scenario.seed + i for i in range(repetitions)]
    snag_sets = None
    if top["snag_sets"] is not None:
        snag_sets = tuple(
            tuple(_parse_snag(raw, f"snag_sets[{i}][{j}]") for j, raw in enumerate(group))
            for i, group in enumerate(top["snag_sets"])
        )
    agent_overrides = None
    if top["agent_overrides"] is not None:
        agent_overrides = tuple(
            None if raw is None else _parse_agent(raw, f"agent_overrides[{i}]")
            for i, raw in enumerate(top["agent_overrides"])
        )
    return TrialPlan(
        name=top["name"],
        scenario=scenario,
        agent=agent,
        repetitions=repetitions,
        seeds=tuple(int(s) for s in seeds),
        dialect=top["dialect"],
        max_sim_s=float(top["max_sim_s"]),
        snag_sets=snag_sets,
        agent_overrides=agent_overrides,
    )


def load_plan(path: str | Path) -> TrialPlan:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return plan_from_dict(json.load(fh), base_dir=path.parent)
