"""Benchmark harness: task suite, strict scoring, timing and failure triage.

Easy and medium tasks are scored one point per executed action that matches
the next expected action for that drone; the first mismatch freezes that
drone's score. Hard tasks are scored one point per satisfied subtask
predicate, order-independent. Failure modes mirror the three observed
categories: incorrect function calls, early stopping, and head agent failure.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .agents import HeadAgent, RunResult, ThreadHistory
from .gateway import LlmGateway
from .scene import Scene, ScriptedVision
from .sim import Fleet

logger = logging.getLogger(__name__)

COMPLEXITIES = ("easy", "medium", "hard")
SUITE_TOTALS = {"easy": 14, "medium": 36, "hard": 13}
OVERALL_DENOMINATOR = sum(SUITE_TOTALS.values())

INCORRECT_FUNCTION_CALLS = "incorrect_function_calls"
EARLY_STOPPING = "early_stopping"
HEAD_AGENT_FAILURE = "head_agent_failure"
FAILURE_MODES = (INCORRECT_FUNCTION_CALLS, EARLY_STOPPING, HEAD_AGENT_FAILURE)

PARAM_TOLERANCE = 1e-6


class SuiteError(Exception):
    """The suite file is unreadable or structurally invalid."""


@dataclass(frozen=True)
class ExpectedAction:
    tool: str
    params: dict

    def matches(self, action: dict) -> bool:
        """True when the executed action is this expected action, and succeeded."""
        if action.get("tool_name") != self.tool or not action.get("success"):
            return False
        actual = action.get("parameters", {})
        for key, matcher in self.params.items():
            if key not in actual or not _param_matches(matcher, actual[key]):
                return False
        return True


def _param_matches(matcher, actual) -> bool:
    if matcher == "*":
        return True
    if isinstance(matcher, dict) and "abs" in matcher:
        return _is_number(actual) and abs(abs(actual) - matcher["abs"]) <= PARAM_TOLERANCE
    if _is_number(matcher) and _is_number(actual):
        return abs(actual - matcher) <= PARAM_TOLERANCE
    return actual == matcher


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class TaskSpec:
    id: str
    complexity: str
    prompt: str
    max_points: int
    expected: dict[int, list[ExpectedAction]] = field(default_factory=dict)
    predicates: list[dict] = field(default_factory=list)

    @property
    def is_hard(self) -> bool:
        return self.complexity == "hard"

    def required_drones(self) -> set[int]:
        drones = {d for d, seq in self.expected.items() if seq}
        drones.update(p["drone"] for p in self.predicates if "drone" in p)
        return drones


@dataclass
class Suite:
    tasks: list[TaskSpec]
    warnings: list[str] = field(default_factory=list)

    def totals(self) -> dict[str, int]:
        totals = {c: 0 for c in COMPLEXITIES}
        for task in self.tasks:
            totals[task.complexity] += task.max_points
        return totals

    def by_id(self, task_id: str) -> TaskSpec:
        for task in self.tasks:
            if task.id == task_id:
                return task
        raise KeyError(task_id)


def load_suite(path: str | Path) -> Suite:
    """Load and validate a suite file; totals mismatches become warnings."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SuiteError(f"cannot load suite {path}: {exc}") from exc

    tasks: list[TaskSpec] = []
    warnings: list[str] = []
    for entry in raw.get("tasks", []):
        complexity = entry.get("complexity")
        if complexity not in COMPLEXITIES:
            raise SuiteError(f"task {entry.get('id')!r} has invalid complexity {complexity!r}")
        expected = {
            int(drone): [ExpectedAction(a["tool"], a.get("params", {})) for a in seq]
            for drone, seq in entry.get("expected", {}).items()
        }
        predicates = list(entry.get("predicates", []))
        computed = len(predicates) if complexity == "hard" else sum(len(s) for s in expected.values())
        declared = entry.get("max_points", computed)
        if declared != computed:
            warnings.append(
                f"task {entry['id']}: declared max_points {declared} != derived {computed}"
            )
        tasks.append(
            TaskSpec(
                id=entry["id"],
                complexity=complexity,
                prompt=entry["prompt"],
                max_points=computed,
                expected=expected,
                predicates=predicates,
            )
        )

    suite = Suite(tasks=tasks)
    if not tasks:
        suite.warnings.append("suite is empty")
    totals = suite.totals()
    for complexity, expected_total in SUITE_TOTALS.items():
        if tasks and totals[complexity] != expected_total:
            per_task = {t.id: t.max_points for t in tasks if t.complexity == complexity}
            suite.warnings.append(
                f"{complexity} tasks total {totals[complexity]} points, expected {expected_total}; "
                f"per-task counts: {per_task}"
            )
    suite.warnings.extend(warnings)
    for warning in suite.warnings:
        logger.warning("suite: %s", warning)
    return suite


def bundled_suite_path() -> Path:
    return Path(__file__).parent / "data" / "suite.json"


def bundled_scene_path() -> Path:
    return Path(__file__).parent / "data" / "scenes" / "bench_scene.json"


# --- scoring ----------------------------------------------------------------


def score_sequential(
    actions_by_drone: dict[int, list[dict]],
    expected_by_drone: dict[int, list[ExpectedAction]],
) -> int:
    """Strict per-drone prefix walk; one point per match, frozen on mismatch."""
    total = 0
    for drone_id, expected in expected_by_drone.items():
        executed = actions_by_drone.get(drone_id, [])
        matched = 0
        for action in executed:
            if matched >= len(expected):
                break
            if expected[matched].matches(action):
                matched += 1
            else:
                break
        total += matched
    return total


def _successful_actions(threads: dict[int, ThreadHistory]) -> list[tuple[int, dict]]:
    out = []
    for drone_id, history in sorted(threads.items()):
        for action in history.executed_actions():
            if action.get("success"):
                out.append((drone_id, action))
    return out


def _action_state(action: dict) -> Optional[dict]:
    payload = action.get("payload") or {}
    return payload.get("state")


def _within(state: dict, position: list[float], tolerance: float) -> bool:
    return math.dist((state["x"], state["y"], state["z"]), tuple(position)) <= tolerance


def _facing(state: dict, target_xy: tuple[float, float]) -> bool:
    """Target lies in the open half-plane ahead of the drone."""
    rad = math.radians(state["heading"])
    fx, fy = math.sin(rad), math.cos(rad)
    return (target_xy[0] - state["x"]) * fx + (target_xy[1] - state["y"]) * fy > 0.0


def eval_predicate(predicate: dict, threads: dict[int, ThreadHistory], response: str) -> bool:
    kind = predicate["kind"]
    actions = _successful_actions(threads)
    if "drone" in predicate:
        actions = [(d, a) for d, a in actions if d == predicate["drone"]]

    if kind == "action_performed":
        return any(a["tool_name"] == predicate["tool"] for _, a in actions)
    if kind == "reached":
        return any(
            (state := _action_state(a)) is not None
            and _within(state, predicate["position"], predicate["tolerance"])
            for _, a in actions
        )
    if kind == "captured_near":
        return any(
            a["tool_name"] == "capture_image"
            and (state := _action_state(a)) is not None
            and _within(state, predicate["position"], predicate["tolerance"])
            for _, a in actions
        )
    if kind == "corner_imaged":
        cx, cy = predicate["corner"]
        tolerance = predicate.get("tolerance", 1.0)
        for _, action in actions:
            if action["tool_name"] != "capture_image":
                continue
            state = _action_state(action)
            if state is None:
                continue
            if math.dist((state["x"], state["y"]), (cx, cy)) <= tolerance and _facing(state, (cx, cy)):
                return True
        return False
    if kind == "captured_from_side":
        ox, oy, _oz = predicate["object"]
        for _, action in actions:
            if action["tool_name"] != "capture_image":
                continue
            state = _action_state(action)
            if state is None:
                continue
            on_side = state["x"] < ox if predicate["side"] == "left" else state["x"] > ox
            if on_side and _facing(state, (ox, oy)):
                return True
        return False
    if kind == "analysis_obtained":
        allowed = (predicate["tool"],) if "tool" in predicate else ("analyze_image", "analyze_gauges")
        return any(a["tool_name"] in allowed for _, a in actions)
    if kind == "response_mentions":
        return predicate["pattern"].lower() in (response or "").lower()
    raise SuiteError(f"unknown predicate kind {kind!r}")


def score_subtasks(threads: dict[int, ThreadHistory], predicates: list[dict], response: str) -> int:
    return sum(1 for p in predicates if eval_predicate(p, threads, response))


def _actions_by_drone(threads: dict[int, ThreadHistory]) -> dict[int, list[dict]]:
    return {drone_id: history.executed_actions() for drone_id, history in threads.items()}


def score_task(task: TaskSpec, threads: dict[int, ThreadHistory], response: str) -> int:
    if task.is_hard:
        return score_subtasks(threads, task.predicates, response)
    return score_sequential(_actions_by_drone(threads), task.expected)


# --- failure classification --------------------------------------------------


def _is_clean_prefix(executed: list[dict], expected: list[ExpectedAction]) -> bool:
    """Executed actions match expected one-for-one with no mismatch.

    The act method's terminate call is loop control, not task content, so it
    is ignored here.
    """
    actions = [a for a in executed if a.get("tool_name") != "terminate"]
    if len(actions) > len(expected):
        return False
    return all(exp.matches(act) for exp, act in zip(expected, actions))


def classify_failure(
    task: TaskSpec,
    threads: dict[int, ThreadHistory],
    response: str,
    points: int,
    head_failure: Optional[str] = None,
) -> Optional[str]:
    if points >= task.max_points:
        return None
    if head_failure is not None:
        return HEAD_AGENT_FAILURE
    if task.max_points > 0 and not threads:
        return HEAD_AGENT_FAILURE
    if any(drone_id not in threads for drone_id in task.required_drones()):
        return HEAD_AGENT_FAILURE

    self_terminated = all(
        history.complete and history.aborted is None for history in threads.values()
    )
    if task.is_hard:
        satisfied = [eval_predicate(p, threads, response) for p in task.predicates]
        clean_prefix = satisfied == sorted(satisfied, reverse=True)
    else:
        executed = _actions_by_drone(threads)
        clean_prefix = all(
            _is_clean_prefix(executed.get(drone_id, []), expected)
            for drone_id, expected in task.expected.items()
        )
    if clean_prefix and self_terminated:
        return EARLY_STOPPING
    return INCORRECT_FUNCTION_CALLS


# --- running ------------------------------------------------------------------


@dataclass
class TaskRun:
    task: TaskSpec
    method: str
    model: str
    result: RunResult
    elapsed: float
    points: int
    failure: Optional[str]


def run_task(
    task: TaskSpec,
    method: str,
    backend_factory: Callable[[], object],
    scene: Scene,
    model: str = "scripted",
    max_iters: int = 20,
    n_drones: int = 2,
    spacing: float = 2.0,
) -> TaskRun:
    """Run one task end to end on a fresh fleet and time the full pipeline."""
    fleet = Fleet.create(n_drones, spacing)
    gateway = LlmGateway(backend_factory())
    head = HeadAgent(fleet, scene, ScriptedVision(scene), gateway, method=method, max_iters=max_iters)
    start = time.perf_counter()
    result = head.execute(task.prompt, run_label=task.id)
    elapsed = time.perf_counter() - start
    points = score_task(task, result.threads, result.response)
    failure = classify_failure(task, result.threads, result.response, points, result.head_failure)
    return TaskRun(task=task, method=method, model=model, result=result,
                   elapsed=elapsed, points=points, failure=failure)


def run_sweep(
    suite: Suite,
    methods: list[str],
    backend_factory: Callable[[], object],
    scene: Scene,
    model: str = "scripted",
    max_iters: int = 20,
) -> dict[tuple[str, str], list[TaskRun]]:
    results: dict[tuple[str, str], list[TaskRun]] = {}
    for method in methods:
        runs = [run_task(task, method, backend_factory, scene, model=model, max_iters=max_iters)
                for task in suite.tasks]
        results[(method, model)] = runs
    return results


# --- reporting ----------------------------------------------------------------


def overall_fraction(easy: int, medium: int, hard: int) -> float:
    return (easy + medium + hard) / OVERALL_DENOMINATOR


def format_overall(value: float) -> str:
    return f"{value:.3f}"


def build_report(results: dict[tuple[str, str], list[TaskRun]], suite: Suite) -> dict:
    maxima = suite.totals()
    rows = []
    for (method, model), runs in results.items():
        points = {c: 0 for c in COMPLEXITIES}
        elapsed: dict[str, list[float]] = {c: [] for c in COMPLEXITIES}
        failures = {mode: 0 for mode in FAILURE_MODES}
        per_task = []
        for run in runs:
            points[run.task.complexity] += run.points
            elapsed[run.task.complexity].append(run.elapsed)
            if run.failure:
                failures[run.failure] += 1
            per_task.append(
                {
                    "task": run.task.id,
                    "points": run.points,
                    "max_points": run.task.max_points,
                    "elapsed": run.elapsed,
                    "failure": run.failure,
                }
            )
        overall = overall_fraction(points["easy"], points["medium"], points["hard"])
        rows.append(
            {
                "method": method,
                "model": model,
                "easy": {"points": points["easy"], "max": maxima["easy"]},
                "medium": {"points": points["medium"], "max": maxima["medium"]},
                "hard": {"points": points["hard"], "max": maxima["hard"]},
                "overall": round(overall, 6),
                "overall_display": format_overall(overall),
                "mean_elapsed": {
                    c: (sum(v) / len(v) if v else 0.0) for c, v in elapsed.items()
                },
                "failures": failures,
                "tasks": per_task,
            }
        )
    return {"rows": rows, "denominator": OVERALL_DENOMINATOR}


def format_report(report: dict) -> str:
    """Aligned text table in the style of a method-by-model comparison."""
    lines = []
    header = f"{'Method':<10} {'Model':<14} {'Easy':>7} {'Medium':>7} {'Hard':>7} {'Overall':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for row in report["rows"]:
        lines.append(
            f"{row['method']:<10} {row['model']:<14} "
            f"{row['easy']['points']}/{row['easy']['max']:<5} "
            f"{row['medium']['points']}/{row['medium']['max']:<5} "
            f"{row['hard']['points']}/{row['hard']['max']:<5} "
            f"{row['overall_display']:>8}"
        )
    lines.append("")
    lines.append(f"{'Method':<10} {'Model':<14} {'Easy s':>8} {'Medium s':>9} {'Hard s':>8}")
    for row in report["rows"]:
        me = row["mean_elapsed"]
        lines.append(
            f"{row['method']:<10} {row['model']:<14} {me['easy']:>8.3f} {me['medium']:>9.3f} {me['hard']:>8.3f}"
        )
    lines.append("")
    lines.append("Failure modes:")
    for row in report["rows"]:
        failures = ", ".join(f"{k}={v}" for k, v in row["failures"].items())
        lines.append(f"  {row['method']}/{row['model']}: {failures}")
    return "\n".join(lines) + "\n"


def write_report(report: dict, json_path: str | Path, text_path: Optional[str | Path] = None) -> None:
    Path(json_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    if text_path is not None:
        Path(text_path).write_text(format_report(report), encoding="utf-8")
