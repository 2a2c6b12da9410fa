"""Shared builders for synthetic transcripts used across test modules."""

from aeroreact.agents import Step, TaskAssignment, ThreadHistory


def action_record(tool, params=None, success=True, state=None, payload_extra=None):
    record = {"tool_name": tool, "parameters": params or {}, "success": success, "message": "msg"}
    payload = {}
    if state is not None:
        payload["state"] = state
    if payload_extra:
        payload.update(payload_extra)
    if payload:
        record["payload"] = payload
    return record


def state_dict(drone_id=2, x=0.0, y=0.0, z=0.0, heading=0.0, flying=True):
    return {
        "id": drone_id,
        "x": x,
        "y": y,
        "z": z,
        "heading": heading,
        "gimbal": 0.0,
        "is_flying": flying,
        "last_command": None,
    }


def synthetic_thread(drone_id, actions, complete=True, aborted=None):
    history = ThreadHistory(drone_id=drone_id, task=TaskAssignment("p", "o"))
    history.steps = [Step(action=a) for a in actions]
    history.complete = complete
    history.aborted = aborted
    return history
