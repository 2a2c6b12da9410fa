"""Suite loading, scoring, failure classification and report arithmetic."""

import json
import random

import pytest

from aeroreact.agents import TaskAssignment, ThreadHistory, Step
from aeroreact.gateway import ScriptedBackend
from aeroreact.harness import (
    EARLY_STOPPING,
    HEAD_AGENT_FAILURE,
    INCORRECT_FUNCTION_CALLS,
    ExpectedAction,
    Suite,
    SuiteError,
    TaskSpec,
    build_report,
    bundled_scene_path,
    bundled_suite_path,
    classify_failure,
    format_overall,
    format_report,
    load_suite,
    overall_fraction,
    run_task,
    score_sequential,
    score_subtasks,
    score_task,
)
from aeroreact.perfect import make_perfect_script
from aeroreact.scene import Scene


def act(tool, params=None, success=True, state=None, payload_extra=None):
    record = {"tool_name": tool, "parameters": params or {}, "success": success, "message": "msg"}
    payload = {}
    if state is not None:
        payload["state"] = state
    if payload_extra:
        payload.update(payload_extra)
    if payload:
        record["payload"] = payload
    return record


def drone_state(drone_id=2, x=0.0, y=0.0, z=0.0, heading=0.0, flying=True):
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


def make_thread(drone_id, actions, complete=True, aborted=None):
    history = ThreadHistory(drone_id=drone_id, task=TaskAssignment("p", "o"))
    history.steps = [Step(action=a) for a in actions]
    history.complete = complete
    history.aborted = aborted
    return history


def exp(tool, params=None):
    return ExpectedAction(tool, params or {})


class TestLoadSuite:
    def test_bundled_suite_counts_and_totals(self):
        suite = load_suite(bundled_suite_path())
        by_complexity = {c: [t for t in suite.tasks if t.complexity == c] for c in ("easy", "medium", "hard")}
        assert len(by_complexity["easy"]) == 8
        assert len(by_complexity["medium"]) == 5
        assert len(by_complexity["hard"]) == 3
        assert suite.totals() == {"easy": 14, "medium": 36, "hard": 13}
        assert suite.warnings == []

    def test_empty_file_warns(self, tmp_path):
        path = tmp_path / "suite.json"
        path.write_text('{"tasks": []}', encoding="utf-8")
        suite = load_suite(path)
        assert suite.tasks == []
        assert any("empty" in w for w in suite.warnings)

    def test_invalid_complexity_is_an_error(self, tmp_path):
        path = tmp_path / "suite.json"
        path.write_text(json.dumps({"tasks": [{"id": "x", "complexity": "爆難", "prompt": "p"}]}), encoding="utf-8")
        with pytest.raises(SuiteError):
            load_suite(path)

    def test_totals_mismatch_warns_with_per_task_counts(self, tmp_path):
        path = tmp_path / "suite.json"
        path.write_text(
            json.dumps(
                {
                    "tasks": [
                        {
                            "id": "easy-xx",
                            "complexity": "easy",
                            "prompt": "p",
                            "expected": {"1": [{"tool": "takeoff", "params": {}}]},
                        }
                    ]
                }
            ),
            encoding="utf-8",
        )
        suite = load_suite(path)
        assert any("easy-xx" in w and "expected 14" in w for w in suite.warnings)

    def test_declared_max_points_mismatch_warns(self, tmp_path):
        path = tmp_path / "suite.json"
        path.write_text(
            json.dumps(
                {
                    "tasks": [
                        {
                            "id": "t",
                            "complexity": "easy",
                            "prompt": "p",
                            "max_points": 7,
                            "expected": {"1": [{"tool": "takeoff", "params": {}}]},
                        }
                    ]
                }
            ),
            encoding="utf-8",
        )
        suite = load_suite(path)
        assert suite.tasks[0].max_points == 1
        assert any("declared max_points 7" in w for w in suite.warnings)


class TestScoreSequential:
    def test_two_takeoffs_score_two(self):
        expected = {1: [exp("takeoff")], 2: [exp("takeoff")]}
        executed = {1: [act("takeoff")], 2: [act("takeoff")]}
        assert score_sequential(executed, expected) == 2

    def test_out_of_order_transcript_scores_zero(self):
        # Executed capture/land/rotate/capture/rotate against rotate/capture/land.
        expected = {2: [exp("rotate", {"angle": {"abs": 180}}), exp("capture_image"), exp("land")]}
        executed = {
            2: [
                act("capture_image"),
                act("land", success=False),
                act("rotate", {"angle": 180}, success=False),
                act("capture_image"),
                act("rotate", {"angle": 180}, success=False),
            ]
        }
        assert score_sequential(executed, expected) == 0

    def test_prefix_scores_partial(self):
        expected = {1: [exp("takeoff"), exp("move", {"direction": "forward", "distance": 4}), exp("capture_image")]}
        executed = {1: [act("takeoff"), act("move", {"direction": "forward", "distance": 4})]}
        assert score_sequential(executed, expected) == 2

    def test_extra_trailing_actions_keep_full_score(self):
        expected = {1: [exp("takeoff")]}
        executed = {1: [act("takeoff"), act("land"), act("takeoff")]}
        assert score_sequential(executed, expected) == 1

    def test_failed_action_freezes_score(self):
        expected = {1: [exp("takeoff"), exp("land")]}
        executed = {1: [act("takeoff", success=False), act("takeoff"), act("land")]}
        assert score_sequential(executed, expected) == 0

    def test_distance_tolerance_and_wildcards(self):
        expected = {1: [exp("move", {"direction": "forward", "distance": 4}), exp("rotate", {"angle": "*"})]}
        executed = {1: [act("move", {"direction": "forward", "distance": 4.0000000001}), act("rotate", {"angle": -37})]}
        assert score_sequential(executed, expected) == 2

    def test_abs_angle_matcher(self):
        expected = {1: [exp("rotate", {"angle": {"abs": 180}})]}
        assert score_sequential({1: [act("rotate", {"angle": -180})]}, expected) == 1
        assert score_sequential({1: [act("rotate", {"angle": 90})]}, expected) == 0

    def test_per_drone_decomposition(self):
        expected = {
            1: [exp("takeoff"), exp("land")],
            2: [exp("takeoff")],
        }
        executed = {1: [act("takeoff"), act("capture_image")], 2: [act("takeoff")]}
        per_drone = [
            score_sequential({d: executed.get(d, [])}, {d: seq}) for d, seq in expected.items()
        ]
        assert score_sequential(executed, expected) == sum(per_drone) == 2


def oracle_prefix_score(executed, expected):
    """Brute-force oracle: the longest k such that the first k executed
    actions match the first k expected actions."""
    best = 0
    for k in range(min(len(executed), len(expected)) + 1):
        if all(expected[j].matches(executed[j]) for j in range(k)):
            best = k
    return best


TOOL_POOL = [
    ("takeoff", {}),
    ("land", {}),
    ("capture_image", {}),
    ("analyze_image", {}),
    ("move", {"direction": "forward", "distance": 3}),
    ("move", {"direction": "left", "distance": 5}),
    ("rotate", {"angle": 90}),
    ("rotate", {"angle": 180}),
]


def _random_transcript(rng):
    expected = [exp(t, dict(p)) for t, p in (rng.choice(TOOL_POOL) for _ in range(rng.randint(1, 6)))]
    executed = []
    for e in expected[: rng.randint(0, len(expected))]:
        executed.append(act(e.tool, dict(e.params), success=rng.random() > 0.15))
    for _ in range(rng.randint(0, 3)):
        tool, params = rng.choice(TOOL_POOL)
        executed.append(act(tool, dict(params), success=rng.random() > 0.15))
    return executed, expected


class TestScoringOracle:
    def test_matches_brute_force_oracle_on_200_random_transcripts(self):
        rng = random.Random(445566)
        for _ in range(200):
            executed, expected = _random_transcript(rng)
            assert score_sequential({1: executed}, {1: expected}) == oracle_prefix_score(executed, expected)

    def test_appending_actions_never_decreases_score(self):
        rng = random.Random(8899)
        for _ in range(100):
            executed, expected = _random_transcript(rng)
            score = score_sequential({1: executed}, {1: expected})
            tool, params = rng.choice(TOOL_POOL)
            extended = executed + [act(tool, dict(params))]
            assert score_sequential({1: extended}, {1: expected}) >= score


GAUGE_PREDICATES = [
    {"kind": "action_performed", "drone": 2, "tool": "takeoff"},
    {"kind": "reached", "drone": 2, "position": [4, 18, 6], "tolerance": 1.0},
    {"kind": "captured_near", "drone": 2, "position": [4, 18, 6], "tolerance": 1.0},
    {"kind": "analysis_obtained", "drone": 2},
    {"kind": "response_mentions", "pattern": "120"},
]


def gauge_early_stop_thread():
    return make_thread(
        2,
        [
            act("takeoff", state=drone_state(z=1.0, y=2.0)),
            act("move", {"direction": "up", "distance": 5}, state=drone_state(y=2.0, z=6.0)),
            act("move", {"direction": "forward", "distance": 16}, state=drone_state(y=18.0, z=6.0)),
            act("move", {"direction": "right", "distance": 4}, state=drone_state(x=4.0, y=18.0, z=6.0)),
            act("capture_image", state=drone_state(x=4.0, y=18.0, z=6.0)),
        ],
        complete=True,
    )


class TestScoreSubtasks:
    def test_four_corners_all_imaged(self):
        predicates = [
            {"kind": "corner_imaged", "corner": [5, 0], "tolerance": 1.0},
            {"kind": "corner_imaged", "corner": [5, 2], "tolerance": 1.0},
            {"kind": "corner_imaged", "corner": [-5, 2], "tolerance": 1.0},
            {"kind": "corner_imaged", "corner": [-5, 0], "tolerance": 1.0},
        ]
        threads = {
            1: make_thread(1, [
                act("capture_image", state=drone_state(1, x=4.5, y=0.0, z=1.0, heading=90.0)),
                act("capture_image", state=drone_state(1, x=4.5, y=2.0, z=1.0, heading=90.0)),
            ]),
            2: make_thread(2, [
                act("capture_image", state=drone_state(2, x=-4.5, y=2.0, z=1.0, heading=270.0)),
                act("capture_image", state=drone_state(2, x=-4.5, y=0.0, z=1.0, heading=270.0)),
            ]),
        }
        assert score_subtasks(threads, predicates, "done") == 4

    def test_corner_requires_facing_half_plane(self):
        predicates = [{"kind": "corner_imaged", "corner": [5, 0], "tolerance": 1.0}]
        # Near the corner but facing away from it.
        threads = {1: make_thread(1, [act("capture_image", state=drone_state(1, x=4.5, y=0.0, z=1.0, heading=270.0))])}
        assert score_subtasks(threads, predicates, "") == 0

    def test_gauge_early_stop_scores_partial(self):
        threads = {2: gauge_early_stop_thread()}
        assert score_subtasks(threads, GAUGE_PREDICATES, "Reached the gauge.") == 3

    def test_gauge_full_completion(self):
        thread = gauge_early_stop_thread()
        thread.steps.append(Step(action=act(
            "analyze_gauges",
            state=None,
            payload_extra={"reading": {"value": 120.0, "units": "psi", "confidence": 0.9}},
        )))
        threads = {2: thread}
        assert score_subtasks(threads, GAUGE_PREDICATES, "The gauge reads approximately 120 psi.") == 5

    def test_no_actions_scores_zero(self):
        assert score_subtasks({}, GAUGE_PREDICATES, "") == 0

    def test_side_capture_predicates(self):
        predicates = [
            {"kind": "captured_from_side", "drone": 1, "object": [3, 4, 5], "side": "left"},
            {"kind": "captured_from_side", "drone": 2, "object": [3, 4, 5], "side": "right"},
        ]
        threads = {
            1: make_thread(1, [act("capture_image", state=drone_state(1, x=0.0, y=4.0, z=5.0, heading=90.0))]),
            2: make_thread(2, [act("capture_image", state=drone_state(2, x=5.0, y=4.0, z=5.0, heading=270.0))]),
        }
        assert score_subtasks(threads, predicates, "") == 2
        # Swap sides: both captures now violate their side conditions.
        swapped = [
            {"kind": "captured_from_side", "drone": 1, "object": [3, 4, 5], "side": "right"},
            {"kind": "captured_from_side", "drone": 2, "object": [3, 4, 5], "side": "left"},
        ]
        assert score_subtasks(threads, swapped, "") == 0


def m2_task():
    return TaskSpec(
        id="medium-02",
        complexity="medium",
        prompt="Drone 2, can you turn around and take a picture, and then land safely?",
        max_points=4,
        expected={2: [exp("takeoff"), exp("rotate", {"angle": {"abs": 180}}), exp("capture_image"), exp("land")]},
    )


def gauge_task():
    return TaskSpec(
        id="hard-02",
        complexity="hard",
        prompt="Drone 2, navigate to the pressure gauge located at (4m, 18m, 6m) and return its status.",
        max_points=5,
        predicates=GAUGE_PREDICATES,
    )


def picture_task():
    return TaskSpec(
        id="easy-04",
        complexity="easy",
        prompt="Can you take a picture with drone 2?",
        max_points=1,
        expected={2: [exp("capture_image")]},
    )


class TestClassifyFailure:
    def test_incorrect_function_calls_anecdote(self):
        threads = {
            2: make_thread(
                2,
                [
                    act("capture_image", state=drone_state()),
                    act("land", success=False),
                    act("rotate", {"angle": 180}, success=False),
                    act("capture_image", state=drone_state()),
                    act("rotate", {"angle": 180}, success=False),
                ],
                complete=True,
            )
        }
        task = m2_task()
        points = score_task(task, threads, "Done.")
        assert points == 0
        assert classify_failure(task, threads, "Done.", points) == INCORRECT_FUNCTION_CALLS

    def test_early_stopping_anecdote(self):
        threads = {2: gauge_early_stop_thread()}
        task = gauge_task()
        points = score_task(task, threads, "Drone 2 reached the gauge and captured an image.")
        assert points == 3
        assert classify_failure(task, threads, "Drone 2 reached the gauge and captured an image.", points) == EARLY_STOPPING

    def test_head_agent_failure_anecdote(self):
        task = picture_task()
        points = score_task(task, {}, "Drone 2 is not available, so a picture could not be taken.")
        assert points == 0
        assert (
            classify_failure(task, {}, "Drone 2 is not available, so a picture could not be taken.", points)
            == HEAD_AGENT_FAILURE
        )

    def test_explicit_head_failure_record(self):
        task = picture_task()
        assert classify_failure(task, {}, "", 0, head_failure="plan references drone 3") == HEAD_AGENT_FAILURE

    def test_missing_required_drone_is_head_failure(self):
        task = m2_task()
        threads = {1: make_thread(1, [act("takeoff", state=drone_state(1, z=1.0))])}
        assert classify_failure(task, threads, "", 0) == HEAD_AGENT_FAILURE

    def test_perfect_run_classifies_none(self):
        task = picture_task()
        threads = {2: make_thread(2, [act("capture_image", state=drone_state())])}
        points = score_task(task, threads, "Picture taken.")
        assert points == 1
        assert classify_failure(task, threads, "Picture taken.", points) is None

    def test_clean_prefix_with_abort_is_incorrect(self):
        task = m2_task()
        threads = {2: make_thread(2, [act("takeoff", state=drone_state(z=1.0))], complete=False, aborted="boom")}
        points = score_task(task, threads, "")
        assert points == 1
        assert classify_failure(task, threads, "", points) == INCORRECT_FUNCTION_CALLS

    def test_sequential_early_stop(self):
        task = m2_task()
        threads = {
            2: make_thread(
                2,
                [act("takeoff", state=drone_state(z=1.0)), act("rotate", {"angle": 180}, state=drone_state(z=1.0, heading=180.0))],
                complete=True,
            )
        }
        points = score_task(task, threads, "")
        assert points == 2
        assert classify_failure(task, threads, "", points) == EARLY_STOPPING

    def test_act_method_terminate_does_not_break_prefix(self):
        task = picture_task()
        threads = {
            2: make_thread(
                2,
                [act("terminate", payload_extra={"signal": "end"})],
                complete=True,
            )
        }
        points = score_task(task, threads, "")
        assert points == 0
        assert classify_failure(task, threads, "", points) == EARLY_STOPPING


TABLE2_ROWS = [
    ("reacteval", "gpt-4.1-nano", 14, 13, 2, "0.460"),
    ("reacteval", "gpt-4.1", 13, 34, 4, "0.810"),
    ("reacteval", "o4-mini", 14, 34, 6, "0.857"),
    ("reacteval", "o3", 13, 34, 10, "0.905"),
    ("react", "gpt-4.1-nano", 14, 18, 2, "0.540"),
    ("react", "gpt-4.1", 13, 30, 2, "0.714"),
    ("react", "o4-mini", 14, 29, 4, "0.746"),
    ("react", "o3", 14, 32, 6, "0.825"),
    ("act", "gpt-4.1-nano", 14, 21, 1, "0.571"),
    ("act", "gpt-4.1", 13, 30, 4, "0.746"),
    ("act", "o4-mini", 14, 33, 3, "0.794"),
    ("act", "o3", 13, 32, 5, "0.794"),
]


class TestReportArithmetic:
    @pytest.mark.parametrize("method,model,easy,medium,hard,printed", TABLE2_ROWS)
    def test_overall_reproduces_published_values(self, method, model, easy, medium, hard, printed):
        assert format_overall(overall_fraction(easy, medium, hard)) == printed

    def test_perfect_scores_give_unity(self):
        assert format_overall(overall_fraction(14, 36, 13)) == "1.000"


@pytest.fixture(scope="module")
def suite():
    return load_suite(bundled_suite_path())


@pytest.fixture(scope="module")
def scene():
    return Scene.load(bundled_scene_path())


class TestRunTaskAndReport:
    def backend_factory(self):
        entries = make_perfect_script()
        return lambda: ScriptedBackend(entries)

    def test_easy_task_timing_and_dispatch(self, suite, scene):
        task = suite.by_id("easy-03")
        run = run_task(task, "reacteval", self.backend_factory(), scene)
        assert run.elapsed > 0
        assert sorted(run.result.threads) == [1]
        assert run.points == task.max_points
        assert run.failure is None

    def test_medium_square_uses_both_drones(self, suite, scene):
        task = suite.by_id("medium-01")
        run = run_task(task, "react", self.backend_factory(), scene)
        assert sorted(run.result.threads) == [1, 2]
        assert run.points == 10

    def test_hard_gauge_transcript_includes_reading(self, suite, scene):
        task = suite.by_id("hard-02")
        run = run_task(task, "reacteval", self.backend_factory(), scene)
        tools = [a["tool_name"] for a in run.result.threads[2].executed_actions()]
        assert "analyze_gauges" in tools
        assert run.points == 5

    def test_report_shape_and_determinism(self, suite, scene):
        factory = self.backend_factory()
        reports = []
        for _ in range(2):
            runs = [run_task(task, "act", factory, scene) for task in suite.tasks]
            report = build_report({("act", "scripted"): runs}, suite)
            for row in report["rows"]:
                for task_row in row["tasks"]:
                    task_row.pop("elapsed")
                row.pop("mean_elapsed")
            reports.append(report)
        assert reports[0] == reports[1]
        row = reports[0]["rows"][0]
        assert row["easy"] == {"points": 14, "max": 14}
        assert row["medium"] == {"points": 36, "max": 36}
        assert row["hard"] == {"points": 13, "max": 13}
        assert row["overall_display"] == "1.000"
        assert all(count == 0 for count in row["failures"].values())

    def test_format_report_is_renderable(self, suite, scene):
        runs = [run_task(task, "reacteval", self.backend_factory(), scene) for task in suite.tasks]
        report = build_report({("reacteval", "scripted"): runs}, suite)
        text = format_report(report)
        assert "reacteval" in text
        assert "1.000" in text
