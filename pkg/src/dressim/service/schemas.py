"""Versioned wire schemas for the bridge."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field

WIRE_VERSION = 1


class CreateSessionRequest(BaseModel):
    plan_name: str | None = None
    plan: dict[str, Any] | None = None
    trial_index: int = 0
    real_time_ratio: float = Field(default=1.0, ge=0.0)


class SessionInfo(BaseModel):
    v: int = WIRE_VERSION
    session_id: str
    status: Literal["lobby", "running", "terminal"]
    plan_name: str
    variant: str
    sim_time: float
    trial_status: str | None = None


class SummaryResponse(BaseModel):
    v: int = WIRE_VERSION
    session_id: str
    status: str
    trial_status: str | None
    events: int
    snags: int
    potential_snags: int
    escalated_snags: int
    resolved: int
    aborts: int
    pauses: dict[str, int]
    waypoint_reached: str | None


class ServerFrame(BaseModel):
    """Server to client stream message."""

    v: int = WIRE_VERSION
    session_id: str
    t: float
    type: Literal[
        "force_sample",
        "control_event",
        "prompt",
        "transcript",
        "mode",
        "speed",
        "waypoint",
        "status",
        "error",
    ]
    payload: dict[str, Any]


class ClientFrame(BaseModel):
    """Client to server stream message."""

    type: Literal["chat", "estop", "start", "reset"]
    text: str | None = None
