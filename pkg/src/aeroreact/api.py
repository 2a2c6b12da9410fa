"""FastAPI wrapper around the session manager.

Routes:
  POST /sessions                    create a session
  POST /sessions/{id}/input        submit a user task (one run at a time)
  GET  /sessions/{id}/events       ordered SSE stream, resumable via ?from=N
  GET  /sessions/{id}/fleet        current fleet snapshot
  GET  /sessions/{id}/transcripts/{run}  persisted transcripts for a run
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .gateway import BackendConfig
from .service import (
    ConfigError,
    SessionBusy,
    SessionConfig,
    SessionManager,
    SessionNotFound,
)


class BackendSpec(BaseModel):
    kind: str
    model_name: str = "scripted"
    endpoint: Optional[str] = None
    script_path: Optional[str] = None
    max_retries: int = 1


class CreateSessionRequest(BaseModel):
    n_drones: int = 2
    spacing: float = 2.0
    method: str = "reacteval"
    backend: Optional[BackendSpec] = None
    scene_path: Optional[str] = None
    max_iters: int = 20


class SubmitInputRequest(BaseModel):
    text: str = Field(min_length=1)


def create_app(manager: Optional[SessionManager] = None, console_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="aeroreact session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.manager = manager if manager is not None else SessionManager()

    @app.post("/sessions")
    def create_session(request: CreateSessionRequest) -> dict:
        backend = None
        if request.backend is not None:
            try:
                backend = BackendConfig(**request.backend.model_dump())
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=[str(exc)])
        config = SessionConfig(
            n_drones=request.n_drones,
            spacing=request.spacing,
            method=request.method,
            backend=backend,
            scene_path=request.scene_path,
            max_iters=request.max_iters,
        )
        try:
            session_id = app.state.manager.create_session(config)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=exc.problems)
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/input")
    def submit_input(session_id: str, request: SubmitInputRequest) -> dict:
        try:
            run_id = app.state.manager.submit_input(session_id, request.text)
        except SessionBusy as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"run_id": run_id}

    @app.get("/sessions/{session_id}/events")
    def stream_events(
        session_id: str,
        from_sequence: int = Query(default=0, alias="from"),
        follow: bool = True,
    ) -> StreamingResponse:
        manager: SessionManager = app.state.manager
        try:
            manager.get(session_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

        def generate():
            for event in manager.stream_events(session_id, from_sequence, follow=follow):
                data = json.dumps(event, ensure_ascii=True)
                yield f"id: {event['sequence']}\ndata: {data}\n\n"

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/fleet")
    def get_fleet(session_id: str) -> dict:
        try:
            return app.state.manager.get_fleet(session_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/sessions/{session_id}/transcripts/{run_id}")
    def get_transcripts(session_id: str, run_id: str) -> dict:
        try:
            return app.state.manager.get_transcripts(session_id, run_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    if console_dir and Path(console_dir).is_dir():
        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    return app
