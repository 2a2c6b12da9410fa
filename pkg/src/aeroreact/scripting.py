"""Helpers for composing scripted-backend playback files.

A script entry is {"thread", "template", "ordinal", "output"}; ordinals are
assigned automatically in composition order per (thread, template). The same
builder drives hand-written test fixtures and the bundled benchmark scripts.
"""

from __future__ import annotations

import json
from pathlib import Path


def describe_call(call: dict) -> str:
    """Readable phrase for a function call, used in generated reasoning text."""
    name = call["function_call"]
    params = call.get("parameters", {})
    if name == "move":
        return f"move {params['direction']} {params['distance']:g}m"
    if name == "rotate":
        return f"rotate {params['angle']:g} degrees"
    if name == "move_gimbal":
        return f"set the gimbal to {params['angle']:g} degrees"
    phrases = {
        "takeoff": "take off",
        "land": "land",
        "capture_image": "capture an image",
        "analyze_image": "analyze the captured image",
        "analyze_gauges": "read the gauge",
        "terminate": "end the task",
    }
    return phrases.get(name, name)


class ScriptBuilder:
    def __init__(self) -> None:
        self.entries: list[dict] = []
        self._counters: dict[tuple[str, str], int] = {}

    def add(self, thread: str, template: str, output: str) -> None:
        key = (thread, template)
        ordinal = self._counters.get(key, 0) + 1
        self._counters[key] = ordinal
        self.entries.append({"thread": thread, "template": template, "ordinal": ordinal, "output": output})

    def add_json(self, thread: str, template: str, obj: dict) -> None:
        self.add(thread, template, json.dumps(obj, ensure_ascii=True))

    def plan(self, run_label: str, per_drone: dict, response_to_user: str = "") -> None:
        record = {str(k): dict(v) for k, v in per_drone.items()}
        record["response_to_user"] = response_to_user
        self.add_json(f"{run_label}/head", "plan", record)

    def respond(self, run_label: str, text: str) -> None:
        self.add(f"{run_label}/head", "respond", text)

    def worker_run(
        self,
        run_label: str,
        drone_id: int,
        method: str,
        calls: list[dict],
        reason_texts: list[str] | None = None,
    ) -> None:
        """Emit the full per-iteration outputs for one worker under one method.

        ``calls`` is the exact function-call sequence the worker should
        execute. reacteval ends via the final evaluation's end flag, react via
        an extra reason turn with the flag raised, act via a terminate call.
        """
        thread = f"{run_label}/drone{drone_id}"
        total = len(calls)

        def reason_text(i: int, call: dict) -> str:
            if reason_texts and i - 1 < len(reason_texts):
                return reason_texts[i - 1]
            return f"Step {i} of {total} in the plan is to {describe_call(call)}."

        if method == "reacteval":
            for i, call in enumerate(calls, 1):
                self.add_json(thread, "reason", {
                    "reasoning": reason_text(i, call),
                    "intended_action": describe_call(call).capitalize() + ".",
                })
                self.add_json(thread, "act", call)
                done = i == total
                self.add_json(thread, "evaluate", {
                    "evaluation_summary": f"Executed {describe_call(call)}; {i} of {total} plan steps are done.",
                    "end_flag": done,
                    "next_steps_notes": "All plan steps are complete." if done
                    else f"Proceed with step {i + 1}: {describe_call(calls[i])}.",
                })
        elif method == "react":
            for i, call in enumerate(calls, 1):
                self.add_json(thread, "reason_with_end_flag", {
                    "reasoning": reason_text(i, call),
                    "intended_action": describe_call(call).capitalize() + ".",
                    "end_flag": False,
                })
                self.add_json(thread, "act", call)
            self.add_json(thread, "reason_with_end_flag", {
                "reasoning": "Every step of the plan has been executed.",
                "intended_action": "none",
                "end_flag": True,
            })
        elif method == "act":
            for call in calls:
                self.add_json(thread, "act_direct", call)
            self.add_json(thread, "act_direct", {"function_call": "terminate", "parameters": {}})
        else:
            raise ValueError(f"unknown method {method!r}")

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            "".join(json.dumps(e, ensure_ascii=True) + "\n" for e in self.entries), encoding="utf-8"
        )
