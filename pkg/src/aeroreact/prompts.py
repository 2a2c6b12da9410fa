"""Prompt templates for every agent step.

Templates use ``string.Template`` placeholders so that JSON examples in the
bodies need no escaping. Rendering is a pure function of (template_id,
context) and fails loudly when a placeholder is unbound.
"""

from __future__ import annotations

from string import Template


class RenderError(Exception):
    """A template was missing, or a placeholder was left unbound."""


_TEMPLATES: dict[str, str] = {
    "plan": """\
Role: Head agent coordinating a fleet of $n_drones drones.

User request: $user_input

Session history: $session_history

Current drone states: $drone_states

Produce a single JSON object that allocates work across the fleet:
- Use drone ids as keys ("1", "2", ...) for every drone you address.
- Each drone entry is an object with:
  - "plan": a numbered step-by-step plan for that drone. Keep steps within the
    drone's capabilities and do not add steps that merely verify earlier steps.
  - "expected_outcome": a description of the drone state that signals the plan
    is complete.
  - "end_flag": boolean; true for simple or informational requests that need
    no drone actions, false when the drone must execute the plan.
- Include "response_to_user": a string with feedback or the requested
  information for the user.

Drone capabilities: takeoff, land, move (forward/backward/left/right/up/down),
rotate, move_gimbal, capture_image, analyze_image, analyze_gauges.

Example (user asked drone 1 to take off and fly forward 5 meters, drone 2 to
take off and fly backward 2 meters):
{"1": {"plan": "1. Takeoff.\\n2. Move to (5, 0, 1).", "expected_outcome": "Drone 1 is located at (5, 0, 1).", "end_flag": false},
 "2": {"plan": "1. Takeoff.\\n2. Move to (0, -2, 1).", "expected_outcome": "Drone 2 is located at (0, -2, 1).", "end_flag": false},
 "response_to_user": ""}
""",
    "reason": """\
Role: Worker agent for drone $drone_id -- choose the single best next action.

Overall plan: $plan
Expected final outcome: $expected_outcome
Current drone state: $state
History of actions and evaluations in this task: $history

Available capabilities:
- Drone functions: takeoff, land, move, rotate, move_gimbal, capture_image.
- Model functions: analyze_image, analyze_gauges.

Reply with a JSON object containing exactly these keys:
- "reasoning": a concise justification for the chosen action.
- "intended_action": a concise description of the single action to take next.

Example:
{"reasoning": "Takeoff is complete and the target is 3m to the right; covering the x axis first closes the largest gap.",
 "intended_action": "Move right 3 meters."}
""",
    "reason_with_end_flag": """\
Role: Worker agent for drone $drone_id -- choose the single best next action,
or end the task.

Overall plan: $plan
Expected final outcome: $expected_outcome
Current drone state: $state
History of actions in this task: $history

Available capabilities:
- Drone functions: takeoff, land, move, rotate, move_gimbal, capture_image.
- Model functions: analyze_image, analyze_gauges.

Reply with a JSON object containing exactly these keys:
- "reasoning": a concise justification.
- "intended_action": the single action to take next ("none" when ending).
- "end_flag": boolean; true if and only if the plan is already complete and no
  further action is needed. When end_flag is true no action will be executed.

Example:
{"reasoning": "The drone is still on the ground; the plan starts with takeoff.",
 "intended_action": "Takeoff.",
 "end_flag": false}
""",
    "act": """\
Role: Worker agent for drone $drone_id -- formulate the function call.

Intended action: $intended_action
Reasoning: $reasoning
Current drone state: $state
Available tools: $tools

Based only on the intended action and the available tools, produce the precise
function call. Parameters must match the tool's schema and the current state.
You MUST reply with a function call.

Reply with a JSON object of the form:
{"function_call": "move", "parameters": {"direction": "forward", "distance": 10}}
""",
    "act_direct": """\
Role: Worker agent for drone $drone_id -- direct function calling.

Overall plan: $plan
Expected final outcome: $expected_outcome
Current drone state: $state
Actions taken so far: $history
Available tools: $tools

Choose the next function call that progresses the plan. Parameters must match
the tool's schema. When every step of the plan is complete, call the
"terminate" function to end the task loop.

Reply with a JSON object of the form:
{"function_call": "move", "parameters": {"direction": "forward", "distance": 10}}
""",
    "evaluate": """\
Role: Worker agent for drone $drone_id -- evaluate the last action.

Overall plan: $plan
Expected final outcome: $expected_outcome
Thread history: $history
Last action result: $last_action
Drone state after the action: $state

Assess whether the most recent action progressed the plan, using the drone
state to confirm the outcome.

Reply with a JSON object containing exactly these keys:
- "evaluation_summary": a concise summary of the action's success and task progress.
- "end_flag": boolean; true if and only if all steps of the plan are finished.
- "next_steps_notes": brief guidance for the next reasoning step.

Example:
{"evaluation_summary": "Right 3m movement succeeded; drone progressed from (0, 0, 1) to (3, 0, 1).",
 "end_flag": false,
 "next_steps_notes": "From (3, 0, 1) the next step is to move forward 3m."}
""",
    "respond": """\
Role: Head agent -- final response to the user.

User request: $user_input
Task allocations: $drone_tasks
Worker results: $results

Write a brief response summarizing what was accomplished for the user,
including any measurements or analysis that were obtained. Reply with plain
text only.
""",
}

TEMPLATE_IDS = tuple(_TEMPLATES)


def render(template_id: str, context: dict) -> str:
    """Render a template; every placeholder must be bound in ``context``."""
    body = _TEMPLATES.get(template_id)
    if body is None:
        raise RenderError(f"unknown template {template_id!r}")
    try:
        return Template(body).substitute({k: str(v) for k, v in context.items()})
    except KeyError as exc:
        raise RenderError(f"template {template_id!r} is missing placeholder {exc.args[0]!r}") from None
