"""Declarative scene configuration and the pluggable vision backend.

The simulator has no renderer; instead a scene file maps world positions to
fixture images and descriptions. A simulated image capture resolves to the
nearest configured object inside the drone's facing half-plane, so camera
content is a deterministic function of drone state.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol

from .sim import DroneState

DEFAULT_FIXTURE_IMAGE = "fixtures/empty_room.png"
DEFAULT_FIXTURE_DESCRIPTION = "An empty room with bare walls and a concrete floor. Nothing of note is visible."


@dataclass(frozen=True)
class SceneObject:
    name: str
    position: tuple[float, float, float]
    image: str
    description: str


DEFAULT_FIXTURE = SceneObject(
    name="empty_room",
    position=(0.0, 0.0, 0.0),
    image=DEFAULT_FIXTURE_IMAGE,
    description=DEFAULT_FIXTURE_DESCRIPTION,
)


class Scene:
    """Read-only set of inspectable objects placed in the world."""

    def __init__(self, objects: list[SceneObject] | None = None):
        self.objects = list(objects or [])

    @classmethod
    def from_list(cls, raw: list[dict]) -> "Scene":
        objects = []
        for entry in raw:
            x, y, z = entry["position"]
            objects.append(
                SceneObject(
                    name=entry["name"],
                    position=(float(x), float(y), float(z)),
                    image=entry["image"],
                    description=entry.get("description", ""),
                )
            )
        return cls(objects)

    @classmethod
    def load(cls, path: str | Path) -> "Scene":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_list(json.load(fh))

    def lookup(self, state: DroneState) -> SceneObject:
        """Resolve what the drone's camera sees from this state.

        Returns the nearest object whose xy offset has a positive dot product
        with the drone's forward vector; falls back to the default fixture.
        """
        rad = math.radians(state.heading)
        fx, fy = math.sin(rad), math.cos(rad)
        best: Optional[tuple[float, SceneObject]] = None
        for obj in self.objects:
            ox, oy, oz = obj.position
            if (ox - state.x) * fx + (oy - state.y) * fy <= 0.0:
                continue
            dist = math.dist((state.x, state.y, state.z), (ox, oy, oz))
            if best is None or dist < best[0]:
                best = (dist, obj)
        return best[1] if best else DEFAULT_FIXTURE

    def find_by_image(self, image: str) -> Optional[SceneObject]:
        for obj in self.objects:
            if obj.image == image:
                return obj
        return None


@dataclass(frozen=True)
class GaugeReading:
    value: float
    units: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")

    def to_dict(self) -> dict:
        return {"value": self.value, "units": self.units, "confidence": self.confidence}


class VisionBackend(Protocol):
    """Interface for image analysis; the default is scripted, a multimodal
    model client can be dropped in without touching the dispatcher."""

    def analyze_image(self, image: str, prompt: Optional[str] = None) -> str: ...

    def analyze_gauges(self, image: str) -> Optional[GaugeReading]: ...


_GAUGE_PATTERN = re.compile(r"(\d+(?:\.\d+)?)\s*(psi|bar|kpa|mpa|rpm|%)", re.IGNORECASE)


class ScriptedVision:
    """Deterministic vision backend backed by the scene's own descriptions."""

    confidence = 0.9

    def __init__(self, scene: Scene):
        self._scene = scene

    def _description(self, image: str) -> str:
        if image == DEFAULT_FIXTURE.image:
            return DEFAULT_FIXTURE.description
        obj = self._scene.find_by_image(image)
        return obj.description if obj else DEFAULT_FIXTURE.description

    def analyze_image(self, image: str, prompt: Optional[str] = None) -> str:
        return self._description(image)

    def analyze_gauges(self, image: str) -> Optional[GaugeReading]:
        match = _GAUGE_PATTERN.search(self._description(image))
        if not match:
            return None
        return GaugeReading(value=float(match.group(1)), units=match.group(2), confidence=self.confidence)
