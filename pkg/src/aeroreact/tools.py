"""Tool registry and dispatcher exposing drone commands and vision tools.

Worker agents act exclusively through named tool calls validated against the
schemas below. The terminate tool exists only in the registry of the direct
action method, which has no evaluation step to end its loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .scene import Scene, VisionBackend
from .sim import Command, Fleet, MOVE_DIRECTIONS

END_SIGNAL = {"signal": "end"}

_BASE_TOOLS: dict[str, dict] = {
    "takeoff": {
        "description": "Lift off to 1.0m altitude.",
        "parameters": {},
    },
    "land": {
        "description": "Land at the current position.",
        "parameters": {},
    },
    "move": {
        "description": "Translate relative to the current heading.",
        "parameters": {
            "direction": {"type": "string", "required": True, "enum": list(MOVE_DIRECTIONS)},
            "distance": {"type": "number", "required": True, "minimum": 0},
        },
    },
    "rotate": {
        "description": "Add an angle in degrees to the current heading (clockwise positive).",
        "parameters": {"angle": {"type": "number", "required": True}},
    },
    "move_gimbal": {
        "description": "Point the camera gimbal to a pitch between 0 and 90 degrees.",
        "parameters": {"angle": {"type": "number", "required": True}},
    },
    "capture_image": {
        "description": "Capture an image of whatever is in front of the drone.",
        "parameters": {},
    },
    "analyze_image": {
        "description": "Describe the most recently captured image (or the current view).",
        "parameters": {"prompt": {"type": "string", "required": False}},
    },
    "analyze_gauges": {
        "description": "Read instrument gauges visible in the most recent image.",
        "parameters": {},
    },
}

_TERMINATE_TOOL = {
    "description": "End the current task loop. Call once the plan is complete.",
    "parameters": {},
}

DRONE_COMMAND_TOOLS = ("takeoff", "land", "move", "rotate", "move_gimbal", "capture_image")
METHODS = ("reacteval", "react", "act")


def list_tools(method: str) -> list[dict]:
    """Tool schemas available to a worker using the given reasoning method."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    tools = [{"name": name, **spec} for name, spec in _BASE_TOOLS.items()]
    if method == "act":
        tools.append({"name": "terminate", **_TERMINATE_TOOL})
    return tools


def _registry(method: str) -> dict[str, dict]:
    return {tool["name"]: tool for tool in list_tools(method)}


@dataclass(frozen=True)
class ToolCall:
    tool_name: str
    parameters: dict
    drone_id: int


@dataclass(frozen=True)
class ToolResult:
    tool_name: str
    success: bool
    message: str
    payload: Optional[dict] = None

    def to_dict(self) -> dict:
        record: dict = {"tool_name": self.tool_name, "success": self.success, "message": self.message}
        if self.payload is not None:
            record["payload"] = self.payload
        return record


def _validate(schema: dict, parameters: dict) -> Optional[str]:
    """Return an error string if the parameters violate the schema."""
    declared = schema["parameters"]
    for key in parameters:
        if key not in declared:
            return f"unexpected parameter {key!r}"
    for key, rules in declared.items():
        if key not in parameters:
            if rules.get("required"):
                return f"missing required parameter {key!r}"
            continue
        value = parameters[key]
        if rules["type"] == "number":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return f"parameter {key!r} must be a number"
            if "minimum" in rules and value < rules["minimum"]:
                return f"parameter {key!r} must be >= {rules['minimum']}"
        elif rules["type"] == "string":
            if not isinstance(value, str):
                return f"parameter {key!r} must be a string"
        if "enum" in rules and value not in rules["enum"]:
            return f"parameter {key!r} must be one of {rules['enum']}"
    return None


class Toolbelt:
    """Validates and executes tool calls against a fleet and a scene.

    The only mutable bit besides the fleet itself is the per-drone record of
    the most recent capture, which the analysis tools are bound to.
    """

    def __init__(self, fleet: Fleet, scene: Scene, vision: VisionBackend, method: str = "reacteval"):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        self.fleet = fleet
        self.scene = scene
        self.vision = vision
        self.method = method
        self._registry = _registry(method)
        self._last_capture: dict[int, str] = {}

    def tools(self) -> list[dict]:
        return list_tools(self.method)

    def invoke(self, call: ToolCall) -> ToolResult:
        schema = self._registry.get(call.tool_name)
        if schema is None:
            return ToolResult(call.tool_name, False, f"unknown tool {call.tool_name!r}")
        error = _validate(schema, call.parameters)
        if error is not None:
            return ToolResult(call.tool_name, False, f"validation failed: {error}")

        if call.tool_name == "terminate":
            return ToolResult("terminate", True, "Termination signal received", dict(END_SIGNAL))
        if call.tool_name in DRONE_COMMAND_TOOLS:
            return self._drone_command(call)
        if call.tool_name == "analyze_image":
            return self._analyze_image(call)
        if call.tool_name == "analyze_gauges":
            return self._analyze_gauges(call)
        return ToolResult(call.tool_name, False, f"unhandled tool {call.tool_name!r}")

    def _drone_command(self, call: ToolCall) -> ToolResult:
        command = Command(
            kind=call.tool_name,
            direction=call.parameters.get("direction"),
            distance=call.parameters.get("distance"),
            angle=call.parameters.get("angle"),
        )
        result = self.fleet.apply(call.drone_id, command)  # FleetError propagates
        if not result.success:
            return ToolResult(call.tool_name, False, result.message)
        payload: dict = {"state": result.new_state.to_dict()}
        if call.tool_name == "capture_image":
            seen = self.scene.lookup(result.new_state)
            self._last_capture[call.drone_id] = seen.image
            payload.update({"image": seen.image, "object": seen.name})
        return ToolResult(call.tool_name, True, result.message, payload)

    def _current_image(self, drone_id: int) -> tuple[str, bool]:
        """Most recent capture for the drone, else the live view (fresh lookup)."""
        if drone_id in self._last_capture:
            return self._last_capture[drone_id], True
        return self.scene.lookup(self.fleet.get(drone_id)).image, False

    def _analyze_image(self, call: ToolCall) -> ToolResult:
        image, from_capture = self._current_image(call.drone_id)
        analysis = self.vision.analyze_image(image, call.parameters.get("prompt"))
        source = "captured image" if from_capture else "live view"
        return ToolResult("analyze_image", True, f"Analyzed {source}", {"image": image, "analysis": analysis})

    def _analyze_gauges(self, call: ToolCall) -> ToolResult:
        image, _ = self._current_image(call.drone_id)
        reading = self.vision.analyze_gauges(image)
        if reading is None:
            return ToolResult("analyze_gauges", False, "No readable gauge in view")
        message = f"Gauge reads {reading.value:g} {reading.units}"
        return ToolResult("analyze_gauges", True, message, {"image": image, "reading": reading.to_dict()})
