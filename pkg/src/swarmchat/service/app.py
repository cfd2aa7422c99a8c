"""HTTP + WebSocket surface over live runs.

Endpoints:
    GET  /runs                      list run ids
    GET  /runs/{id}/snapshot        consistent snapshot of the latest tick
    POST /runs/{id}/inform          body {"text": ...} -> {"text": reply}
    POST /runs/{id}/instruct        body {"text": ...} -> directive object
    POST /runs/{id}/pause|resume
    WS   /runs/{id}/stream          {"type": "snapshot"|"transcript", "data": ...}
"""

from __future__ import annotations

import asyncio
import queue

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .runner import LiveRun, NoDirectiveError, OperatorBackendError


class OperatorBody(BaseModel):
    text: str


def create_app(runs: dict[str, LiveRun]) -> FastAPI:
    app = FastAPI(title="swarmchat operator service")

    def get_run(run_id: str) -> LiveRun:
        run = runs.get(run_id)
        if run is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}")
        return run

    @app.get("/runs")
    def list_runs():
        return {"runs": sorted(runs)}

    @app.get("/runs/{run_id}/snapshot")
    def snapshot(run_id: str):
        return get_run(run_id).snapshot_state()

    @app.post("/runs/{run_id}/inform")
    def inform(run_id: str, body: OperatorBody):
        run = get_run(run_id)
        if not body.text.strip():
            raise HTTPException(status_code=422, detail="inform text must be non-empty")
        try:
            return {"text": run.handle_inform(body.text)}
        except OperatorBackendError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc

    @app.post("/runs/{run_id}/instruct")
    def instruct(run_id: str, body: OperatorBody):
        run = get_run(run_id)
        if not body.text.strip():
            raise HTTPException(status_code=422, detail="instruct text must be non-empty")
        try:
            directive = run.handle_instruct(body.text)
        except NoDirectiveError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except OperatorBackendError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        return {"activity": directive.activity.value,
                "target": list(directive.target) if directive.target else None}

    @app.post("/runs/{run_id}/pause")
    def pause(run_id: str):
        get_run(run_id).pause()
        return {"paused": True}

    @app.post("/runs/{run_id}/resume")
    def resume(run_id: str):
        get_run(run_id).resume()
        return {"paused": False}

    @app.websocket("/runs/{run_id}/stream")
    async def stream(websocket: WebSocket, run_id: str):
        run = runs.get(run_id)
        await websocket.accept()
        if run is None:
            await websocket.send_json({"type": "error",
                                       "data": {"detail": f"unknown run {run_id!r}"}})
            await websocket.close(code=4404)
            return
        events = run.subscribe()
        try:
            while True:
                try:
                    event = events.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.02)
                    continue
                await websocket.send_json(event)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            run.unsubscribe(events)

    return app
