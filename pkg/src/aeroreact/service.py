"""Interactive session service: HTTP API, ordered event stream, persistence.

Each session owns one fleet and serializes its runs: a single user input is
processed at a time, while events fan out to any number of stream readers.
Events and transcripts append to JSONL files under AEROREACT_DATA_DIR so a
session can be restored by replaying its log.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional

from .agents import HeadAgent, SessionHistory
from .gateway import BackendConfig, LlmGateway, build_backend
from .scene import Scene, ScriptedVision
from .sim import DroneState, Fleet

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "AEROREACT_DATA_DIR"

EVENT_KINDS = (
    "user_input",
    "head_plan",
    "reason",
    "action",
    "evaluation",
    "state_update",
    "response",
    "error",
)


class SessionError(Exception):
    pass


class SessionNotFound(SessionError):
    pass


class SessionBusy(SessionError):
    pass


class ConfigError(SessionError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class SessionConfig:
    n_drones: int = 2
    spacing: float = 2.0
    method: str = "reacteval"
    backend: Optional[BackendConfig] = None
    scene_path: Optional[str] = None
    max_iters: int = 20

    def validate(self) -> None:
        problems = []
        if self.n_drones < 1:
            problems.append(f"n_drones must be >= 1, got {self.n_drones}")
        if self.spacing <= 0:
            problems.append(f"spacing must be > 0, got {self.spacing}")
        if self.method not in ("reacteval", "react", "act"):
            problems.append(f"method must be one of reacteval/react/act, got {self.method!r}")
        if self.max_iters < 1:
            problems.append(f"max_iters must be >= 1, got {self.max_iters}")
        if self.scene_path and not Path(self.scene_path).exists():
            problems.append(f"scene_path {self.scene_path!r} does not exist")
        if problems:
            raise ConfigError(problems)


class EventLog:
    """Per-session ordered event log with broadcast to waiting readers."""

    def __init__(self, path: Optional[Path] = None):
        self._events: list[dict] = []
        self._cond = threading.Condition()
        self._path = path

    @property
    def last_sequence(self) -> int:
        with self._cond:
            return self._events[-1]["sequence"] if self._events else 0

    def append(self, kind: str, payload: dict) -> dict:
        with self._cond:
            event = {
                "sequence": len(self._events) + 1,
                "kind": kind,
                "payload": payload,
                "timestamp": datetime.now(timezone.utc).isoformat(),
            }
            self._events.append(event)
            if self._path is not None:
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(event, ensure_ascii=True) + "\n")
            self._cond.notify_all()
            return event

    def preload(self, events: list[dict]) -> None:
        with self._cond:
            self._events = list(events)

    def events_from(self, sequence: int) -> list[dict]:
        with self._cond:
            # Sequences are dense and 1-based: slice instead of scanning.
            start = max(sequence, 1) - 1
            return list(self._events[start:])

    def wait_beyond(self, sequence: int, timeout: float) -> bool:
        """Block until an event with sequence > `sequence` exists."""
        with self._cond:
            return self._cond.wait_for(lambda: len(self._events) > sequence, timeout=timeout)


class Session:
    def __init__(self, session_id: str, config: SessionConfig, directory: Optional[Path], backend):
        self.id = session_id
        self.config = config
        self.directory = directory
        if directory is not None:
            directory.mkdir(parents=True, exist_ok=True)
            (directory / "transcripts").mkdir(exist_ok=True)
            (directory / "events.jsonl").touch(exist_ok=True)
        self.log = EventLog(directory / "events.jsonl" if directory else None)
        self.fleet = Fleet.create(config.n_drones, config.spacing)
        self.scene = Scene.load(config.scene_path) if config.scene_path else Scene()
        self.history = SessionHistory()
        self.head = HeadAgent(
            self.fleet,
            self.scene,
            ScriptedVision(self.scene),
            LlmGateway(backend),
            method=config.method,
            max_iters=config.max_iters,
            session=self.history,
            on_event=self.log.append,
        )
        self.run_lock = threading.Lock()
        self.run_active = False
        self.runs: list[str] = []

    def next_run_id(self) -> str:
        return f"run{len(self.runs) + 1:04d}"


class SessionManager:
    """Owns sessions; one active run per session, many concurrent sessions."""

    def __init__(self, data_dir: Optional[str | Path] = None):
        raw = data_dir if data_dir is not None else os.environ.get(DATA_DIR_ENV)
        self.data_dir = Path(raw) if raw else None
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _session_dir(self, session_id: str) -> Optional[Path]:
        return self.data_dir / session_id if self.data_dir else None

    def create_session(self, config: SessionConfig, backend=None, session_id: Optional[str] = None) -> str:
        config.validate()
        if backend is None:
            backend = build_backend(config.backend) if config.backend else _NullBackend()
        session_id = session_id or uuid.uuid4().hex[:12]
        session = Session(session_id, config, self._session_dir(session_id), backend)
        if session.directory is not None:
            (session.directory / "config.json").write_text(
                json.dumps(_config_to_dict(config), indent=2) + "\n", encoding="utf-8"
            )
        with self._lock:
            self._sessions[session_id] = session
        return session_id

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise SessionNotFound(f"unknown session {session_id!r}")
        return session

    def submit_input(self, session_id: str, text: str) -> str:
        session = self.get(session_id)
        with session.run_lock:
            if session.run_active:
                raise SessionBusy(f"session {session_id} already has an active run")
            session.run_active = True
            run_id = session.next_run_id()
            session.runs.append(run_id)
        thread = threading.Thread(target=self._run, args=(session, run_id, text), daemon=True)
        thread.start()
        return run_id

    def _run(self, session: Session, run_id: str, text: str) -> None:
        try:
            result = session.head.execute(text, run_label=run_id)
            self._persist_transcripts(session, run_id, result)
        except Exception as exc:  # a run must never take the service down
            logger.exception("run %s failed", run_id)
            session.log.append("error", {"error": str(exc)})
        finally:
            with session.run_lock:
                session.run_active = False

    @staticmethod
    def _persist_transcripts(session: Session, run_id: str, result) -> None:
        if session.directory is None:
            return
        transcripts_dir = session.directory / "transcripts"
        record = {
            "run": run_id,
            "user_input": result.user_input,
            "response": result.response,
            "head_failure": result.head_failure,
            "threads": {str(d): h.to_jsonl() for d, h in result.threads.items()},
        }
        (transcripts_dir / f"{run_id}.json").write_text(
            json.dumps(record, ensure_ascii=True, indent=2) + "\n", encoding="utf-8"
        )
        for drone_id, history in result.threads.items():
            (transcripts_dir / f"{run_id}.drone{drone_id}.jsonl").write_text(
                history.to_jsonl(), encoding="utf-8"
            )

    def wait_until_idle(self, session_id: str, timeout: float = 30.0) -> bool:
        session = self.get(session_id)
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with session.run_lock:
                if not session.run_active:
                    return True
            time.sleep(0.005)
        return False

    def stream_events(
        self,
        session_id: str,
        from_sequence: int = 0,
        follow: bool = False,
        poll_timeout: float = 0.1,
    ) -> Iterator[dict]:
        """All events with sequence >= from_sequence, then live events in order.

        With follow=False the stream ends once the session is idle and fully
        drained; with follow=True it keeps waiting for future events.
        """
        session = self.get(session_id)
        next_sequence = max(from_sequence, 1)
        while True:
            batch = session.log.events_from(next_sequence)
            for event in batch:
                next_sequence = event["sequence"] + 1
                yield event
            if follow:
                session.log.wait_beyond(next_sequence - 1, timeout=poll_timeout)
                continue
            with session.run_lock:
                active = session.run_active
            if not active and not session.log.events_from(next_sequence):
                return
            session.log.wait_beyond(next_sequence - 1, timeout=poll_timeout)

    def get_fleet(self, session_id: str) -> dict:
        return self.get(session_id).fleet.snapshot()

    def get_transcripts(self, session_id: str, run_id: str) -> dict:
        session = self.get(session_id)
        if session.directory is not None:
            path = session.directory / "transcripts" / f"{run_id}.json"
            if path.exists():
                return json.loads(path.read_text(encoding="utf-8"))
        raise SessionNotFound(f"no transcripts for run {run_id!r} in session {session_id!r}")

    def restore(self, session_id: str, backend=None) -> str:
        """Rebuild a persisted session by replaying its event log."""
        directory = self._session_dir(session_id)
        if directory is None or not (directory / "events.jsonl").exists():
            raise SessionNotFound(f"no persisted session {session_id!r}")
        config = config_from_dict(json.loads((directory / "config.json").read_text(encoding="utf-8")))
        events, corrupt = _read_event_log(directory / "events.jsonl")
        if corrupt:
            logger.warning(
                "session %s: event log corrupt after %d events; truncating tail", session_id, len(events)
            )
            (directory / "events.jsonl").write_text(
                "".join(json.dumps(e, ensure_ascii=True) + "\n" for e in events), encoding="utf-8"
            )

        if backend is None:
            backend = build_backend(config.backend) if config.backend else _NullBackend()
        session = Session(session_id, config, directory, backend)
        session.log.preload(events)

        last_state = None
        user_input = None
        for event in events:
            if event["kind"] == "state_update":
                last_state = event["payload"]
            elif event["kind"] == "user_input":
                user_input = event["payload"].get("text", "")
            elif event["kind"] == "response":
                session.history.append(
                    {
                        "user_input": user_input or "",
                        "head_plan": None,
                        "outcomes": {},
                        "response": event["payload"].get("text", ""),
                    }
                )
                session.runs.append(f"run{len(session.runs) + 1:04d}")
        if last_state is not None:
            session.fleet = _fleet_from_snapshot(last_state)
            session.head.fleet = session.fleet
            session.head.toolbelt.fleet = session.fleet

        with self._lock:
            self._sessions[session_id] = session
        return session_id


class _NullBackend:
    def complete(self, prompt: str, *, thread: str, template_id: str) -> str:
        from .gateway import TransportError

        raise TransportError("no backend configured for this session")


def _config_to_dict(config: SessionConfig) -> dict:
    backend = None
    if config.backend is not None:
        backend = {
            "kind": config.backend.kind,
            "model_name": config.backend.model_name,
            "endpoint": config.backend.endpoint,
            "script_path": config.backend.script_path,
            "max_retries": config.backend.max_retries,
        }
        backend = {k: v for k, v in backend.items() if v is not None}
    return {
        "n_drones": config.n_drones,
        "spacing": config.spacing,
        "method": config.method,
        "backend": backend,
        "scene_path": config.scene_path,
        "max_iters": config.max_iters,
    }


def config_from_dict(raw: dict) -> SessionConfig:
    backend = raw.get("backend")
    return SessionConfig(
        n_drones=raw.get("n_drones", 2),
        spacing=raw.get("spacing", 2.0),
        method=raw.get("method", "reacteval"),
        backend=BackendConfig(**backend) if backend else None,
        scene_path=raw.get("scene_path"),
        max_iters=raw.get("max_iters", 20),
    )


def _read_event_log(path: Path) -> tuple[list[dict], bool]:
    events: list[dict] = []
    corrupt = False
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
                if "sequence" not in event or "kind" not in event:
                    raise ValueError("missing event fields")
            except (json.JSONDecodeError, ValueError):
                corrupt = True
                break
            events.append(event)
    return events, corrupt


def _fleet_from_snapshot(snapshot: dict) -> Fleet:
    drones = [
        DroneState(
            drone_id=d["id"],
            x=d["x"],
            y=d["y"],
            z=d["z"],
            heading=d["heading"],
            gimbal=d["gimbal"],
            is_flying=d["is_flying"],
            last_command=d.get("last_command"),
        )
        for d in snapshot["drones"]
    ]
    return Fleet(drones)
