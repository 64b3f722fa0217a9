"""FastAPI application exposing session control and the event stream."""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import ValidationError

from ..scenario import ScenarioError, load_plan, plan_from_dict
from .schemas import ClientFrame, CreateSessionRequest, SessionInfo, SummaryResponse
from .session import Session

PLANS_DIR = Path(__file__).parent.parent / "data" / "plans"


def shipped_plans() -> dict[str, Path]:
    return {p.stem: p for p in sorted(PLANS_DIR.glob("*.json"))}


def create_app() -> FastAPI:
    app = FastAPI(title="dressim bridge", version="1.0")
    sessions: dict[str, Session] = {}

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return session

    @app.get("/plans")
    def list_plans() -> dict:
        return {"plans": sorted(shipped_plans())}

    @app.post("/session", response_model=SessionInfo)
    def create_session(req: CreateSessionRequest) -> SessionInfo:
        try:
            if req.plan is not None:
                plan = plan_from_dict(req.plan)
                name = plan.name
            elif req.plan_name is not None:
                path = shipped_plans().get(req.plan_name)
                if path is None:
                    raise HTTPException(status_code=404, detail=f"no plan {req.plan_name}")
                plan = load_plan(path)
                name = req.plan_name
            else:
                raise HTTPException(status_code=422, detail="plan or plan_name required")
        except ScenarioError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        if not 0 <= req.trial_index < plan.repetitions:
            raise HTTPException(status_code=422, detail="trial_index out of range")
        session = Session(plan, req.trial_index, req.real_time_ratio, name)
        sessions[session.id] = session
        return session.info()

    @app.post("/session/{session_id}/start", response_model=SessionInfo)
    async def start_session(session_id: str) -> SessionInfo:
        session = get_session(session_id)
        try:
            session.start()
        except RuntimeError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return session.info()

    @app.post("/session/{session_id}/reset", response_model=SessionInfo)
    async def reset_session(session_id: str) -> SessionInfo:
        session = get_session(session_id)
        session.reset()
        return session.info()

    @app.get("/session/{session_id}", response_model=SessionInfo)
    def session_info(session_id: str) -> SessionInfo:
        return get_session(session_id).info()

    @app.get("/session/{session_id}/summary", response_model=SummaryResponse)
    def session_summary(session_id: str) -> SummaryResponse:
        return get_session(session_id).summary()

    @app.websocket("/session/{session_id}/ws")
    async def session_stream(websocket: WebSocket, session_id: str) -> None:
        session = sessions.get(session_id)
        if session is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        cid, queue = session.attach()

        async def pump_out() -> None:
            while True:
                frame = await queue.get()
                await websocket.send_text(frame.model_dump_json())

        sender = asyncio.create_task(pump_out())
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    frame = ClientFrame.model_validate(json.loads(raw))
                except (ValidationError, json.JSONDecodeError) as exc:
                    await websocket.send_text(
                        json.dumps(
                            {
                                "v": 1,
                                "session_id": session.id,
                                "t": session.runner.world.t,
                                "type": "error",
                                "payload": {"message": f"bad frame: {exc.__class__.__name__}"},
                            }
                        )
                    )
                    continue
                if frame.type == "chat":
                    if frame.text:
                        session.submit_chat(frame.text)
                elif frame.type == "estop":
                    session.submit_estop()
                elif frame.type == "start":
                    try:
                        session.start()
                    except RuntimeError:
                        pass
                elif frame.type == "reset":
                    session.reset()
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            session.detach(cid)

    return app
