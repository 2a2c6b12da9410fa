"""Ideal-run scripts for the bundled benchmark suite.

The generated script drives every suite task to full marks under all three
reasoning methods: entries for the reason/act/evaluate, reason-with-flag, and
direct-action templates coexist in one file because the scripted backend keys
on (thread, template, ordinal). A separate small script reproduces the golden
single-drone inspection trace used for playback testing.
"""

from __future__ import annotations

from pathlib import Path

from .scripting import ScriptBuilder, describe_call

METHODS = ("reacteval", "react", "act")

FIG7_RUN_LABEL = "fig7"
FIG7_PROMPT = "Drone 1, fly forward 4m, take a picture and describe what you see."


def _takeoff() -> dict:
    return {"function_call": "takeoff", "parameters": {}}


def _land() -> dict:
    return {"function_call": "land", "parameters": {}}


def _capture() -> dict:
    return {"function_call": "capture_image", "parameters": {}}


def _analyze() -> dict:
    return {"function_call": "analyze_image", "parameters": {}}


def _gauges() -> dict:
    return {"function_call": "analyze_gauges", "parameters": {}}


def _move(direction: str, distance: float) -> dict:
    return {"function_call": "move", "parameters": {"direction": direction, "distance": distance}}


def _rotate(angle: float) -> dict:
    return {"function_call": "rotate", "parameters": {"angle": angle}}


def _square(side: float) -> list[dict]:
    return [
        _takeoff(),
        _move("forward", side),
        _move("right", side),
        _move("backward", side),
        _move("left", side),
    ]


# Exact per-drone call sequences that earn full marks on every suite task.
# Hard-task waypoints keep the drone inside predicate tolerances while the
# target stays ahead of it (image resolution needs the facing half-plane).
IDEAL_CALLS: dict[str, dict[int, list[dict]]] = {
    "easy-01": {},
    "easy-02": {1: [_takeoff()], 2: [_takeoff()]},
    "easy-03": {1: [_takeoff(), _move("forward", 2)]},
    "easy-04": {2: [_capture()]},
    "easy-05": {2: [_analyze()]},
    "easy-06": {1: [_takeoff(), _land()], 2: [_takeoff(), _land()]},
    "easy-07": {},
    "easy-08": {1: [_takeoff(), _rotate(180)], 2: [_takeoff(), _rotate(180)]},
    "medium-01": {1: _square(3), 2: _square(3)},
    "medium-02": {2: [_takeoff(), _rotate(180), _capture(), _land()]},
    "medium-03": {1: [_takeoff(), _move("forward", 4), _capture(), _analyze()]},
    "medium-04": {
        1: [_takeoff(), _move("right", 5), _move("up", 5), _rotate(180), _land()],
        2: [_takeoff(), _move("left", 5), _move("up", 2), _rotate(90), _land()],
    },
    "medium-05": {
        1: [_takeoff(), _move("left", 5), _rotate(120), _move("forward", 5)],
        2: [_takeoff(), _move("right", 5), _rotate(-120), _move("forward", 5)],
    },
    "hard-01": {
        1: [_takeoff(), _rotate(90), _move("forward", 4.5), _capture(), _move("left", 2), _capture()],
        2: [_takeoff(), _rotate(-90), _move("forward", 4.5), _capture(), _move("left", 2), _capture()],
    },
    "hard-02": {
        2: [_takeoff(), _move("up", 5), _move("forward", 15.5), _move("right", 4), _capture(), _gauges()],
    },
    "hard-03": {
        1: [_takeoff(), _move("up", 4), _move("forward", 4), _rotate(90), _capture(), _analyze()],
        2: [_takeoff(), _move("up", 4), _move("right", 5), _move("forward", 2), _rotate(-90), _capture(), _analyze()],
    },
}

INFORMATIONAL_RESPONSES = {
    "easy-01": (
        "I coordinate this drone fleet: I turn your requests into per-drone plans, and each "
        "drone can take off, land, move, rotate, adjust its camera gimbal, capture images, "
        "and run image or gauge analysis."
    ),
    "easy-07": (
        "Drone 1 is landed at (0, 0, 0) and drone 2 is landed at (0, 2, 0); both have "
        "heading 0 degrees and gimbal 0 degrees."
    ),
}

RESPONSES: dict[str, str] = {
    **INFORMATIONAL_RESPONSES,
    "easy-02": "Both drones took off and are hovering at 1.0m.",
    "easy-03": "Drone 1 took off and moved forward 2m.",
    "easy-04": "Drone 2 captured an image from its current position.",
    "easy-05": "Drone 2 analyzed its view and reported what it sees.",
    "easy-06": "Both drones took off and then landed safely at their starting positions.",
    "easy-08": "Both drones took off and rotated 180 degrees.",
    "medium-01": "Both drones flew a 3m square (forward, right, backward, left) and returned to their starting points.",
    "medium-02": "Drone 2 took off, turned around, captured an image, and landed safely.",
    "medium-03": "Drone 1 flew forward 4m, captured an image, and analyzed it: the view shows a pressure gauge on a red pipe assembly.",
    "medium-04": "Drone 1 moved right 5m and up 5m, turned around, and landed; drone 2 moved left 5m and up 2m, rotated 90 degrees, and landed.",
    "medium-05": "Both drones flew their 5m triangle legs with 120-degree turns; drone 1 started left, drone 2 started right.",
    "hard-01": "All four corners of the room were imaged; drone 1 covered the +x corners and drone 2 the -x corners.",
    "hard-02": "Drone 2 navigated to the pressure gauge and read it: approximately 120 psi.",
    "hard-03": "Drone 1 described the object from its left side and drone 2 from its right side after capturing and analyzing images of the storage tank.",
}


def _plan_entry(drone_id: int, calls: list[dict]) -> dict:
    steps = "\n".join(f"{i}. {describe_call(c).capitalize()}." for i, c in enumerate(calls, 1))
    outcome = f"Drone {drone_id} has executed: " + "; ".join(describe_call(c) for c in calls) + "."
    return {"plan": steps, "expected_outcome": outcome, "end_flag": False}


def _informational_plan(n_drones: int = 2) -> dict[int, dict]:
    return {
        drone_id: {
            "plan": "No drone action is required for this request.",
            "expected_outcome": "Drone state unchanged.",
            "end_flag": True,
        }
        for drone_id in range(1, n_drones + 1)
    }


def add_task_entries(builder: ScriptBuilder, task_id: str, methods=METHODS) -> None:
    calls_by_drone = IDEAL_CALLS[task_id]
    if not calls_by_drone:
        builder.plan(task_id, _informational_plan(), response_to_user=INFORMATIONAL_RESPONSES[task_id])
    else:
        per_drone = {d: _plan_entry(d, calls) for d, calls in sorted(calls_by_drone.items())}
        builder.plan(task_id, per_drone)
    for method in methods:
        for drone_id, calls in sorted(calls_by_drone.items()):
            builder.worker_run(task_id, drone_id, method, calls)
    builder.respond(task_id, RESPONSES[task_id])


def make_perfect_script() -> list[dict]:
    builder = ScriptBuilder()
    for task_id in IDEAL_CALLS:
        add_task_entries(builder, task_id)
    return builder.entries


FIG7_CALLS = [_takeoff(), _move("forward", 4), _capture(), _analyze(), _land()]

FIG7_REASONS = [
    "The drone is on the ground (is_flying=false); the first step of the plan is to take off to 1m altitude.",
    "Takeoff is complete and the drone is hovering at (0, 0, 1); the next step is to fly forward 4 meters.",
    "The drone reached (0, 4, 1) as planned; the next step is to capture an image from here.",
    "An image was captured at (0, 4, 1); the next step is to analyze it and describe the scene.",
    "The image has been captured and analyzed; the remaining step is to land the drone.",
]

FIG7_RESPONSE = (
    "Drone 1 took off, flew forward 4m, captured and analyzed an image, and then landed. "
    "The photo shows a close-up of a pressure gauge attached to a red industrial pipe, "
    "with its needle at approximately 120 psi."
)


def make_fig7_script() -> list[dict]:
    builder = ScriptBuilder()
    builder.plan(
        FIG7_RUN_LABEL,
        {
            1: {
                "plan": "1. Take off.\n2. Move forward 4m.\n3. Capture an image.\n4. Analyze the image.\n5. Land.",
                "expected_outcome": "Drone 1 is landed at (0, 4, 0) and the captured image has been described.",
                "end_flag": False,
            }
        },
    )
    builder.worker_run(FIG7_RUN_LABEL, 1, "reacteval", FIG7_CALLS, reason_texts=FIG7_REASONS)
    builder.respond(FIG7_RUN_LABEL, FIG7_RESPONSE)
    return builder.entries


# --- bundled file locations ----------------------------------------------------

_DATA = Path(__file__).parent / "data"


def bundled_perfect_script_path() -> Path:
    return _DATA / "scripts" / "perfect.jsonl"


def bundled_fig7_script_path() -> Path:
    return _DATA / "scripts" / "fig7.jsonl"


def bundled_fig7_scene_path() -> Path:
    return _DATA / "scenes" / "fig7_scene.json"


def bundled_golden_transcript_path() -> Path:
    return _DATA / "golden" / "fig7_drone1.jsonl"


def write_bundled_scripts() -> None:
    """Regenerate the bundled script files from the generators above."""
    scripts_dir = _DATA / "scripts"
    scripts_dir.mkdir(parents=True, exist_ok=True)
    perfect = ScriptBuilder()
    perfect.entries = make_perfect_script()
    perfect.write(bundled_perfect_script_path())
    fig7 = ScriptBuilder()
    fig7.entries = make_fig7_script()
    fig7.write(bundled_fig7_script_path())
