"""Scene resolution and tool dispatch tests."""

import random

import pytest

from aeroreact.scene import DEFAULT_FIXTURE, GaugeReading, Scene, ScriptedVision
from aeroreact.sim import DroneState, Fleet, FleetError
from aeroreact.tools import Toolbelt, ToolCall, list_tools

GAUGE = {
    "name": "pressure_gauge",
    "position": [0, 6, 1],
    "image": "fixtures/gauge_120psi.png",
    "description": "An analog pressure gauge mounted on a red pipe assembly. The needle points to approximately 120 psi.",
}
TANK = {
    "name": "storage_tank",
    "position": [3, 8, 1],
    "image": "fixtures/tank.png",
    "description": "A vertical storage tank with a ladder on its side.",
}
BEHIND = {
    "name": "door",
    "position": [0, -3, 1],
    "image": "fixtures/door.png",
    "description": "A service door.",
}


def make_belt(method="reacteval", objects=(GAUGE, TANK, BEHIND)):
    fleet = Fleet.create(2)
    scene = Scene.from_list(list(objects))
    return Toolbelt(fleet, scene, ScriptedVision(scene), method=method)


class TestSceneLookup:
    def test_nearest_facing_object_wins(self):
        scene = Scene.from_list([GAUGE, TANK])
        # At (0,4,1) facing +y: gauge is 2m ahead, tank is 5m away.
        state = DroneState(drone_id=1, y=4.0, z=1.0, is_flying=True)
        assert scene.lookup(state).name == "pressure_gauge"

    def test_object_behind_is_ignored(self):
        scene = Scene.from_list([BEHIND, GAUGE])
        state = DroneState(drone_id=1, z=1.0, is_flying=True)
        assert scene.lookup(state).name == "pressure_gauge"

    def test_empty_scene_falls_back_to_default(self):
        assert Scene().lookup(DroneState(drone_id=1)) is DEFAULT_FIXTURE

    def test_half_plane_follows_heading(self):
        scene = Scene.from_list(
            [
                {"name": "east", "position": [5, 0, 1], "image": "e.png", "description": "east wall"},
                {"name": "west", "position": [-5, 0, 1], "image": "w.png", "description": "west wall"},
            ]
        )
        east_facing = DroneState(drone_id=1, z=1.0, heading=90.0, is_flying=True)
        west_facing = DroneState(drone_id=1, z=1.0, heading=270.0, is_flying=True)
        assert scene.lookup(east_facing).name == "east"
        assert scene.lookup(west_facing).name == "west"


class TestScriptedVision:
    def test_gauge_reading_parsed_from_description(self):
        scene = Scene.from_list([GAUGE])
        reading = ScriptedVision(scene).analyze_gauges(GAUGE["image"])
        assert reading is not None
        assert reading.value == pytest.approx(120.0)
        assert reading.units == "psi"
        assert 0.0 <= reading.confidence <= 1.0

    def test_no_gauge_in_plain_description(self):
        scene = Scene.from_list([TANK])
        assert ScriptedVision(scene).analyze_gauges(TANK["image"]) is None

    def test_confidence_bounds_enforced(self):
        with pytest.raises(ValueError):
            GaugeReading(value=1.0, units="psi", confidence=1.5)


class TestRegistry:
    def test_terminate_only_under_act(self):
        act_names = {tool["name"] for tool in list_tools("act")}
        assert "terminate" in act_names
        for method in ("reacteval", "react"):
            names = {tool["name"] for tool in list_tools(method)}
            assert "terminate" not in names
            assert {"takeoff", "land", "move", "rotate", "move_gimbal", "capture_image",
                    "analyze_image", "analyze_gauges"} <= names

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            list_tools("chain_of_thought")


class TestInvoke:
    def test_move_after_takeoff(self):
        belt = make_belt()
        assert belt.invoke(ToolCall("takeoff", {}, 1)).success
        result = belt.invoke(ToolCall("move", {"direction": "forward", "distance": 4}, 1))
        assert result.success
        assert result.message == "Moved forward by 4m"
        assert result.payload["state"]["y"] == pytest.approx(4.0)

    def test_capture_image_returns_reference(self):
        belt = make_belt()
        result = belt.invoke(ToolCall("capture_image", {}, 2))
        assert result.success
        assert "image" in result.payload
        assert belt.fleet.get(2).last_command == {"kind": "capture_image"}

    def test_terminate_rejected_outside_act(self):
        for method in ("reacteval", "react"):
            result = make_belt(method).invoke(ToolCall("terminate", {}, 1))
            assert not result.success
            assert "unknown tool" in result.message

    def test_terminate_returns_end_signal_under_act(self):
        result = make_belt("act").invoke(ToolCall("terminate", {}, 1))
        assert result.success
        assert result.payload == {"signal": "end"}

    def test_validation_failure_does_not_mutate(self):
        belt = make_belt()
        before = belt.fleet.snapshot()
        for params in ({"direction": "forward"}, {"direction": "up", "distance": -2},
                       {"direction": "warp", "distance": 1}, {"direction": "forward", "distance": "far"},
                       {"direction": "forward", "distance": 1, "extra": True}):
            result = belt.invoke(ToolCall("move", params, 1))
            assert not result.success
            assert "validation failed" in result.message
        assert belt.fleet.snapshot() == before

    def test_unknown_drone_propagates_fleet_error(self):
        belt = make_belt()
        with pytest.raises(FleetError):
            belt.invoke(ToolCall("takeoff", {}, 3))

    def test_result_tool_name_echoes_request(self):
        belt = make_belt("act")
        rng = random.Random(4242)
        names = [tool["name"] for tool in belt.tools()] + ["bogus", "warp"]
        for _ in range(200):
            name = rng.choice(names)
            result = belt.invoke(ToolCall(name, {}, rng.choice([1, 2])))
            assert result.tool_name == name


class TestAnalysis:
    def test_analyze_binds_to_most_recent_capture(self):
        belt = make_belt()
        belt.invoke(ToolCall("takeoff", {}, 1))
        captured = belt.invoke(ToolCall("capture_image", {}, 1))
        assert captured.payload["object"] == "pressure_gauge"
        # Turn away; analysis must still describe the captured image.
        belt.invoke(ToolCall("rotate", {"angle": 180}, 1))
        result = belt.invoke(ToolCall("analyze_image", {}, 1))
        assert result.success
        assert "captured image" in result.message
        assert "pressure gauge" in result.payload["analysis"]

    def test_analyze_without_capture_uses_live_view(self):
        belt = make_belt()
        result = belt.invoke(ToolCall("analyze_image", {}, 2))
        assert result.success
        assert "live view" in result.message
        assert "pressure gauge" in result.payload["analysis"]

    def test_gauge_reading_through_toolbelt(self):
        belt = make_belt()
        belt.invoke(ToolCall("takeoff", {}, 1))
        belt.invoke(ToolCall("move", {"direction": "forward", "distance": 4}, 1))
        belt.invoke(ToolCall("capture_image", {}, 1))
        result = belt.invoke(ToolCall("analyze_gauges", {}, 1))
        assert result.success
        assert result.payload["reading"]["value"] == pytest.approx(120.0)
        assert "120" in result.message

    def test_gauge_failure_when_nothing_readable(self):
        belt = make_belt(objects=())
        result = belt.invoke(ToolCall("analyze_gauges", {}, 1))
        assert not result.success
