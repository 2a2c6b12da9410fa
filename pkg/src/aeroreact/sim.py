"""Deterministic kinematic simulator for a fleet of indoor inspection drones.

Coordinate conventions used everywhere in this package:

- x, y, z are meters; z is altitude above the floor.
- heading is degrees in [0, 360); heading 0 faces +y and increases
  clockwise (compass style), so forward = (sin h, cos h) and
  right = (cos h, -sin h).
- gimbal is camera pitch in degrees, constrained to [0, 90].

State changes are instantaneous per command; there is no physics layer.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

MOVE_DIRECTIONS = ("forward", "backward", "left", "right", "up", "down")
COMMAND_KINDS = ("takeoff", "land", "move", "rotate", "move_gimbal", "capture_image")

GIMBAL_MIN = 0.0
GIMBAL_MAX = 90.0
TAKEOFF_ALTITUDE = 1.0

# Tolerance for float dirt when a descent lands exactly on the floor.
_GROUND_EPS = 1e-9


class SimulationError(Exception):
    """Base class for simulator errors."""


class FleetError(SimulationError):
    """Raised for invalid fleet construction or an unknown drone id."""


class CommandError(SimulationError):
    """Raised for a structurally invalid command."""


@dataclass(frozen=True)
class DroneState:
    """Immutable snapshot of one drone. Commands produce new snapshots."""

    drone_id: int
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    heading: float = 0.0
    gimbal: float = 0.0
    is_flying: bool = False
    last_command: Optional[dict] = None

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def to_dict(self) -> dict:
        """Canonical telemetry shape, shared by the event stream and the API."""
        return {
            "id": self.drone_id,
            "x": self.x,
            "y": self.y,
            "z": self.z,
            "heading": self.heading,
            "gimbal": self.gimbal,
            "is_flying": self.is_flying,
            "last_command": dict(self.last_command) if self.last_command else None,
        }


@dataclass(frozen=True)
class Command:
    """A single drone command. Field requirements depend on ``kind``."""

    kind: str
    direction: Optional[str] = None
    distance: Optional[float] = None
    angle: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in COMMAND_KINDS:
            raise CommandError(f"unknown command kind {self.kind!r}")
        if self.kind == "move":
            if self.direction is None or self.distance is None:
                raise CommandError("move requires direction and distance")
            if self.direction not in MOVE_DIRECTIONS:
                raise CommandError(f"unknown move direction {self.direction!r}")
            if self.distance < 0:
                raise CommandError("move distance must be >= 0")
        elif self.kind in ("rotate", "move_gimbal"):
            if self.angle is None:
                raise CommandError(f"{self.kind} requires an angle")

    def descriptor(self) -> dict:
        """Compact record stored as the drone's last executed command."""
        desc: dict = {"kind": self.kind}
        if self.direction is not None:
            desc["direction"] = self.direction
        if self.distance is not None:
            desc["distance"] = self.distance
        if self.angle is not None:
            desc["angle"] = self.angle
        return desc


@dataclass(frozen=True)
class CommandResult:
    success: bool
    message: str
    new_state: DroneState

    @staticmethod
    def failure(state: DroneState, message: str) -> "CommandResult":
        # Failed commands never mutate state.
        return CommandResult(success=False, message=message, new_state=state)


def _heading_vectors(heading_deg: float) -> tuple[tuple[float, float], tuple[float, float]]:
    rad = math.radians(heading_deg)
    forward = (math.sin(rad), math.cos(rad))
    right = (math.cos(rad), -math.sin(rad))
    return forward, right


def takeoff(state: DroneState) -> CommandResult:
    if state.is_flying:
        return CommandResult.failure(state, "Takeoff failed: already flying")
    new_state = replace(state, z=TAKEOFF_ALTITUDE, is_flying=True)
    return CommandResult(True, "Takeoff successful (simulated)", new_state)


def land(state: DroneState) -> CommandResult:
    if not state.is_flying:
        return CommandResult.failure(state, "Landing failed: already landed")
    new_state = replace(state, z=0.0, is_flying=False)
    return CommandResult(True, "Landing successful (simulated)", new_state)


def move(state: DroneState, direction: str, distance: float) -> CommandResult:
    if direction not in MOVE_DIRECTIONS:
        raise CommandError(f"unknown move direction {direction!r}")
    if distance < 0:
        raise CommandError("move distance must be >= 0")
    if not state.is_flying:
        return CommandResult.failure(state, "Move failed: drone not flying")

    if direction in ("up", "down"):
        new_z = state.z + distance if direction == "up" else state.z - distance
        if new_z < -_GROUND_EPS:
            return CommandResult.failure(state, "Move failed: below ground")
        new_state = replace(state, z=max(new_z, 0.0))
    else:
        forward, right = _heading_vectors(state.heading)
        sign = 1.0 if direction in ("forward", "right") else -1.0
        ux, uy = forward if direction in ("forward", "backward") else right
        new_state = replace(state, x=state.x + sign * distance * ux, y=state.y + sign * distance * uy)
    return CommandResult(True, f"Moved {direction} by {distance:g}m", new_state)


def rotate(state: DroneState, angle: float) -> CommandResult:
    if not state.is_flying:
        return CommandResult.failure(state, "Rotate failed: drone not flying")
    new_heading = (state.heading + angle) % 360.0
    new_state = replace(state, heading=new_heading)
    return CommandResult(True, f"Rotated by {angle:g} degrees", new_state)


def move_gimbal(state: DroneState, angle: float) -> CommandResult:
    applied = min(max(angle, GIMBAL_MIN), GIMBAL_MAX)
    message = f"Gimbal set to {applied:g} degrees"
    if applied != angle:
        message += f" (clamped from {angle:g})"
    return CommandResult(True, message, replace(state, gimbal=applied))


def _execute(state: DroneState, command: Command) -> CommandResult:
    if command.kind == "takeoff":
        return takeoff(state)
    if command.kind == "land":
        return land(state)
    if command.kind == "move":
        return move(state, command.direction, command.distance)
    if command.kind == "rotate":
        return rotate(state, command.angle)
    if command.kind == "move_gimbal":
        return move_gimbal(state, command.angle)
    if command.kind == "capture_image":
        return CommandResult(True, "Image captured successfully", state)
    raise CommandError(f"unknown command kind {command.kind!r}")


def init_fleet(n: int, spacing: float = 2.0) -> list[DroneState]:
    """Drone i (1-based) starts landed at (0, spacing * (i - 1), 0) facing +y."""
    if n < 1:
        raise FleetError(f"fleet size must be >= 1, got {n}")
    if spacing <= 0:
        raise FleetError(f"spacing must be > 0, got {spacing}")
    return [DroneState(drone_id=i + 1, y=spacing * i) for i in range(n)]


class Fleet:
    """Owns the authoritative state of every drone.

    Mutations are serialized through an internal lock; reads hand out
    snapshots, so concurrent readers never observe partial updates.
    """

    def __init__(self, drones: Iterable[DroneState]):
        self._drones: dict[int, DroneState] = {d.drone_id: d for d in drones}
        if not self._drones:
            raise FleetError("fleet must contain at least one drone")
        self._lock = threading.Lock()

    @classmethod
    def create(cls, n: int, spacing: float = 2.0) -> "Fleet":
        return cls(init_fleet(n, spacing))

    @property
    def ids(self) -> list[int]:
        return sorted(self._drones)

    def has(self, drone_id: int) -> bool:
        return drone_id in self._drones

    def get(self, drone_id: int) -> DroneState:
        try:
            return self._drones[drone_id]
        except KeyError:
            raise FleetError(f"drone {drone_id} is not in the fleet") from None

    def apply(self, drone_id: int, command: Command) -> CommandResult:
        with self._lock:
            state = self.get(drone_id)
            result = _execute(state, command)
            if result.success:
                stamped = replace(result.new_state, last_command=command.descriptor())
                self._drones[drone_id] = stamped
                result = CommandResult(True, result.message, stamped)
            return result

    def snapshot(self) -> dict:
        """Fleet telemetry: {"drones": [...]} ordered by drone id."""
        with self._lock:
            return {"drones": [self._drones[i].to_dict() for i in sorted(self._drones)]}


def apply_command(fleet: Fleet, drone_id: int, command: Command) -> CommandResult:
    """Dispatch one command to one drone; unknown ids raise FleetError."""
    return fleet.apply(drone_id, command)
