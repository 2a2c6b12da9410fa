"""Head agent planning and the worker reasoning loops.

The head agent turns one user request into per-drone assignments and a final
response; workers execute their assignment through one of three loops:

- reacteval: reason -> act -> evaluate, ending when an evaluation raises the
  end flag;
- react: reason (with end flag) -> act, where a raised flag ends the loop
  before any action executes;
- act: direct function calling only, ending via the terminate tool.

Session history belongs to the head and persists across runs; thread history
belongs to a worker and starts empty for every assignment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from .gateway import GatewayError, LlmGateway
from .scene import Scene, VisionBackend
from .sim import Fleet
from .tools import DRONE_COMMAND_TOOLS, Toolbelt, ToolCall

DEFAULT_MAX_ITERS = 20

EventHook = Optional[Callable[[str, dict], None]]


class HeadAgentFailure(Exception):
    """Planning produced no usable dispatch (bad ids, unparseable output)."""


@dataclass(frozen=True)
class TaskAssignment:
    plan: str
    expected_outcome: str


@dataclass
class Step:
    reasoning: Optional[dict] = None
    action: Optional[dict] = None
    evaluation: Optional[dict] = None

    def to_record(self, index: int) -> dict:
        record: dict = {"step": index}
        if self.reasoning is not None:
            record["reasoning"] = self.reasoning
        if self.action is not None:
            record["action"] = self.action
        if self.evaluation is not None:
            record["evaluation"] = self.evaluation
        return record


@dataclass
class ThreadHistory:
    drone_id: int
    task: TaskAssignment
    steps: list[Step] = field(default_factory=list)
    complete: bool = False
    aborted: Optional[str] = None

    @property
    def iteration(self) -> int:
        return len(self.steps)

    def executed_actions(self) -> list[dict]:
        return [step.action for step in self.steps if step.action is not None]

    def to_jsonl(self) -> str:
        """One line per step plus a {complete, iterations} trailer."""
        lines = [json.dumps(step.to_record(i), ensure_ascii=True) for i, step in enumerate(self.steps, 1)]
        trailer: dict = {"complete": self.complete, "iterations": self.iteration}
        if self.aborted is not None:
            trailer["aborted"] = self.aborted
        lines.append(json.dumps(trailer, ensure_ascii=True))
        return "\n".join(lines) + "\n"


def thread_from_jsonl(text: str) -> ThreadHistory:
    """Rebuild enough of a thread from its serialized transcript to score it."""
    history = ThreadHistory(drone_id=0, task=TaskAssignment("", ""))
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if "step" in record:
            history.steps.append(
                Step(
                    reasoning=record.get("reasoning"),
                    action=record.get("action"),
                    evaluation=record.get("evaluation"),
                )
            )
        else:
            history.complete = bool(record.get("complete", False))
            history.aborted = record.get("aborted")
    return history


@dataclass(frozen=True)
class HeadPlan:
    per_drone: dict[int, dict]
    response_to_user: str

    def dispatchable(self) -> list[int]:
        return sorted(k for k, v in self.per_drone.items() if not v["end_flag"])

    def to_dict(self) -> dict:
        record: dict = {str(k): dict(v) for k, v in sorted(self.per_drone.items())}
        record["response_to_user"] = self.response_to_user
        return record


@dataclass
class RunResult:
    user_input: str
    head_plan: Optional[HeadPlan]
    threads: dict[int, ThreadHistory]
    response: str
    head_failure: Optional[str] = None


class SessionHistory:
    """Append-only head-scoped log of every run in the session."""

    def __init__(self) -> None:
        self.entries: list[dict] = []

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, entry: dict) -> None:
        self.entries.append(entry)

    def render(self) -> str:
        condensed = [
            {"user_input": e["user_input"], "response": e["response"]} for e in self.entries
        ]
        return json.dumps(condensed, ensure_ascii=True)


def _compact_history(history: ThreadHistory) -> str:
    """Thread history as seen by the prompts: terse, deterministic."""
    rendered = []
    for i, step in enumerate(history.steps, 1):
        item: dict = {"step": i}
        if step.reasoning is not None:
            item["reasoning"] = step.reasoning.get("reasoning")
        if step.action is not None:
            item["action"] = f"{step.action['tool_name']}: {step.action['message']}"
        if step.evaluation is not None:
            item["evaluation"] = step.evaluation.get("evaluation_summary")
            item["next_steps_notes"] = step.evaluation.get("next_steps_notes")
        rendered.append(item)
    return json.dumps(rendered, ensure_ascii=True)


class WorkerAgent:
    """Runs one drone's assignment with the configured reasoning loop."""

    def __init__(
        self,
        drone_id: int,
        toolbelt: Toolbelt,
        gateway: LlmGateway,
        method: str,
        max_iters: int = DEFAULT_MAX_ITERS,
        thread_label: Optional[str] = None,
        on_event: EventHook = None,
    ):
        self.drone_id = drone_id
        self.toolbelt = toolbelt
        self.gateway = gateway
        self.method = method
        self.max_iters = max_iters
        self.thread_label = thread_label or f"drone{drone_id}"
        self._on_event = on_event

    def _emit(self, kind: str, payload: dict) -> None:
        if self._on_event:
            self._on_event(kind, payload)

    def _state_json(self) -> str:
        return json.dumps(self.toolbelt.fleet.get(self.drone_id).to_dict(), ensure_ascii=True)

    def _base_context(self, task: TaskAssignment, history: ThreadHistory) -> dict:
        return {
            "drone_id": self.drone_id,
            "plan": task.plan,
            "expected_outcome": task.expected_outcome,
            "state": self._state_json(),
            "history": _compact_history(history),
        }

    def _complete(self, template_id: str, context: dict) -> dict:
        return self.gateway.complete(
            thread=self.thread_label, template_id=template_id, context=context
        ).parsed

    def _execute_call(self, parsed_call: dict) -> dict:
        call = ToolCall(parsed_call["function_call"], parsed_call["parameters"], self.drone_id)
        result = self.toolbelt.invoke(call)
        # The transcript keeps the requested parameters next to the outcome;
        # sequential scoring matches on them.
        record: dict = {"tool_name": result.tool_name, "parameters": dict(call.parameters)}
        record.update({k: v for k, v in result.to_dict().items() if k != "tool_name"})
        self._emit("action", {"drone_id": self.drone_id, **record})
        if result.success and result.tool_name in DRONE_COMMAND_TOOLS:
            self._emit("state_update", self.toolbelt.fleet.snapshot())
        return record

    def run(self, task: TaskAssignment) -> ThreadHistory:
        history = ThreadHistory(drone_id=self.drone_id, task=task)
        loop = {
            "reacteval": self._run_react_eval,
            "react": self._run_react,
            "act": self._run_act,
        }[self.method]
        try:
            loop(task, history)
        except GatewayError as exc:
            history.aborted = str(exc)
            self._emit("error", {"drone_id": self.drone_id, "error": str(exc)})
        return history

    def _run_react_eval(self, task: TaskAssignment, history: ThreadHistory) -> None:
        while not history.complete and history.iteration < self.max_iters:
            context = self._base_context(task, history)
            reasoning = self._complete("reason", context)
            self._emit("reason", {"drone_id": self.drone_id, **reasoning})

            action = self._act_from_reasoning(reasoning)

            eval_context = self._base_context(task, history)
            eval_context["last_action"] = json.dumps(
                {"tool_name": action["tool_name"], "success": action["success"], "message": action["message"]},
                ensure_ascii=True,
            )
            evaluation = self._complete("evaluate", eval_context)
            self._emit("evaluation", {"drone_id": self.drone_id, **evaluation})

            history.complete = evaluation["end_flag"]
            history.steps.append(Step(reasoning=reasoning, action=action, evaluation=evaluation))

    def _run_react(self, task: TaskAssignment, history: ThreadHistory) -> None:
        while not history.complete and history.iteration < self.max_iters:
            context = self._base_context(task, history)
            reasoning = self._complete("reason_with_end_flag", context)
            self._emit("reason", {"drone_id": self.drone_id, **reasoning})
            if reasoning["end_flag"]:
                # A raised flag ends the task before any action executes.
                history.complete = True
                history.steps.append(Step(reasoning=reasoning))
                continue
            action = self._act_from_reasoning(reasoning)
            history.steps.append(Step(reasoning=reasoning, action=action))

    def _run_act(self, task: TaskAssignment, history: ThreadHistory) -> None:
        while not history.complete and history.iteration < self.max_iters:
            context = self._base_context(task, history)
            context["tools"] = json.dumps(self.toolbelt.tools(), ensure_ascii=True)
            parsed = self._complete("act_direct", context)
            action = self._execute_call(parsed)
            if action.get("payload", {}).get("signal") == "end":
                history.complete = True
            history.steps.append(Step(action=action))

    def _act_from_reasoning(self, reasoning: dict) -> dict:
        context = {
            "drone_id": self.drone_id,
            "intended_action": reasoning["intended_action"],
            "reasoning": reasoning["reasoning"],
            "state": self._state_json(),
            "tools": json.dumps(self.toolbelt.tools(), ensure_ascii=True),
        }
        parsed = self._complete("act", context)
        return self._execute_call(parsed)


class HeadAgent:
    """Plans per-drone work, dispatches workers sequentially, and responds."""

    def __init__(
        self,
        fleet: Fleet,
        scene: Scene,
        vision: VisionBackend,
        gateway: LlmGateway,
        method: str = "reacteval",
        max_iters: int = DEFAULT_MAX_ITERS,
        session: Optional[SessionHistory] = None,
        on_event: EventHook = None,
    ):
        self.fleet = fleet
        self.gateway = gateway
        self.method = method
        self.max_iters = max_iters
        self.session = session if session is not None else SessionHistory()
        self.toolbelt = Toolbelt(fleet, scene, vision, method=method)
        self._on_event = on_event

    def _emit(self, kind: str, payload: dict) -> None:
        if self._on_event:
            self._on_event(kind, payload)

    def plan(self, user_input: str, run_label: str) -> HeadPlan:
        context = {
            "n_drones": len(self.fleet.ids),
            "user_input": user_input,
            "session_history": self.session.render(),
            "drone_states": json.dumps(self.fleet.snapshot(), ensure_ascii=True),
        }
        try:
            output = self.gateway.complete(
                thread=f"{run_label}/head", template_id="plan", context=context
            )
        except GatewayError as exc:
            raise HeadAgentFailure(f"planning failed: {exc}") from exc

        parsed = dict(output.parsed)
        response_to_user = parsed.pop("response_to_user", "")
        per_drone: dict[int, dict] = {}
        for key, entry in parsed.items():
            drone_id = int(key)
            if not self.fleet.has(drone_id):
                raise HeadAgentFailure(f"plan references drone {drone_id}, which is not in the fleet")
            per_drone[drone_id] = entry
        return HeadPlan(per_drone=per_drone, response_to_user=response_to_user)

    def respond(self, user_input: str, head_plan: Optional[HeadPlan], results: dict, run_label: str) -> str:
        context = {
            "user_input": user_input,
            "drone_tasks": json.dumps(head_plan.to_dict() if head_plan else {}, ensure_ascii=True),
            "results": json.dumps(results, ensure_ascii=True),
        }
        try:
            output = self.gateway.complete(
                thread=f"{run_label}/head", template_id="respond", context=context
            )
            return output.parsed["text"]
        except GatewayError:
            return self._fallback_response(results)

    @staticmethod
    def _fallback_response(results: dict) -> str:
        if not results:
            return "No drone tasks were dispatched for this request."
        parts = []
        for drone_id, summary in sorted(results.items()):
            if summary.get("aborted"):
                parts.append(f"drone {drone_id} failed ({summary['aborted']})")
            elif summary.get("complete"):
                parts.append(f"drone {drone_id} completed its task in {summary['iterations']} step(s)")
            else:
                parts.append(f"drone {drone_id} stopped without completing its task")
        return "Run summary: " + "; ".join(parts) + "."

    def execute(self, user_input: str, run_label: Optional[str] = None) -> RunResult:
        run_label = run_label or f"run{len(self.session) + 1:04d}"
        self._emit("user_input", {"text": user_input})

        try:
            head_plan = self.plan(user_input, run_label)
        except HeadAgentFailure as exc:
            response = f"Unable to plan this request: {exc}"
            self._emit("error", {"error": str(exc)})
            self._emit("state_update", self.fleet.snapshot())
            self._emit("response", {"text": response})
            self.session.append(
                {"user_input": user_input, "head_plan": None, "outcomes": {}, "response": response}
            )
            return RunResult(user_input, None, {}, response, head_failure=str(exc))

        self._emit("head_plan", head_plan.to_dict())

        threads: dict[int, ThreadHistory] = {}
        for drone_id in head_plan.dispatchable():
            worker = WorkerAgent(
                drone_id,
                self.toolbelt,
                self.gateway,
                self.method,
                max_iters=self.max_iters,
                thread_label=f"{run_label}/drone{drone_id}",
                on_event=self._on_event,
            )
            task = TaskAssignment(
                plan=head_plan.per_drone[drone_id]["plan"],
                expected_outcome=head_plan.per_drone[drone_id]["expected_outcome"],
            )
            threads[drone_id] = worker.run(task)

        results = {
            str(drone_id): {
                "complete": history.complete,
                "iterations": history.iteration,
                "aborted": history.aborted,
                "actions": [
                    {"tool": a["tool_name"], "success": a["success"], "message": a["message"]}
                    for a in history.executed_actions()
                ],
            }
            for drone_id, history in threads.items()
        }
        response = self.respond(user_input, head_plan, results, run_label)
        if not response:
            response = self._fallback_response(results)

        self._emit("state_update", self.fleet.snapshot())
        self._emit("response", {"text": response})
        self.session.append(
            {
                "user_input": user_input,
                "head_plan": head_plan.to_dict(),
                "outcomes": results,
                "response": response,
            }
        )
        return RunResult(user_input, head_plan, threads, response)
