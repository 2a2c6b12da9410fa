"""Command-line entry points: serve, run, bench, score."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .agents import thread_from_jsonl
from .gateway import BackendConfig, LlmGateway, build_backend
from .harness import (
    Suite,
    build_report,
    bundled_scene_path,
    bundled_suite_path,
    classify_failure,
    format_report,
    load_suite,
    run_sweep,
    score_task,
    write_report,
)
from .perfect import bundled_perfect_script_path
from .scene import Scene
from .service import SessionConfig, SessionManager, config_from_dict


def parse_backend(spec: str, model: str) -> BackendConfig:
    """Accepts scripted:<path>, http:<endpoint>, or a bare http(s) URL."""
    if spec.startswith("scripted:"):
        return BackendConfig(kind="scripted", script_path=spec[len("scripted:"):], model_name=model)
    if spec.startswith(("http://", "https://")):
        return BackendConfig(kind="http", endpoint=spec, model_name=model)
    if spec.startswith("http:"):
        return BackendConfig(kind="http", endpoint=spec[len("http:"):], model_name=model)
    raise click.BadParameter(f"backend must be scripted:<path> or http:<endpoint>, got {spec!r}")


@click.group()
def main() -> None:
    """Hierarchical multi-drone agent console and benchmark harness."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Service config JSON: {data_dir, host, port}.")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
def serve(config_path, host, port):
    """Start the HTTP session service."""
    import uvicorn

    from .api import create_app

    settings = {}
    if config_path:
        settings = json.loads(Path(config_path).read_text(encoding="utf-8"))
    manager = SessionManager(data_dir=settings.get("data_dir"))
    console_dir = settings.get("console_dir")
    app = create_app(manager, console_dir=console_dir)
    uvicorn.run(app, host=host or settings.get("host", "127.0.0.1"), port=port or settings.get("port", 8000))


@main.command()
@click.option("--task", "task_text", required=True, help="Natural-language task for the fleet.")
@click.option("--method", type=click.Choice(["reacteval", "react", "act"]), default="reacteval")
@click.option("--backend", "backend_spec", default=None,
              help="scripted:<path> or http:<endpoint>; defaults to the bundled ideal script.")
@click.option("--model", default="scripted")
@click.option("--scene", "scene_path", type=click.Path(exists=True), default=None)
@click.option("--n-drones", type=int, default=2)
@click.option("--max-iters", type=int, default=20)
@click.option("--run-label", default="run0001", help="Thread label prefix used for scripted playback.")
@click.option("--transcripts-out", type=click.Path(), default=None, help="Directory for thread transcripts.")
def run(task_text, method, backend_spec, model, scene_path, n_drones, max_iters, run_label, transcripts_out):
    """Run a single task in-process and print the outcome."""
    from .agents import HeadAgent
    from .scene import ScriptedVision
    from .sim import Fleet

    backend_config = parse_backend(backend_spec or f"scripted:{bundled_perfect_script_path()}", model)
    scene = Scene.load(scene_path or bundled_scene_path())
    fleet = Fleet.create(n_drones)
    head = HeadAgent(fleet, scene, ScriptedVision(scene), LlmGateway(build_backend(backend_config)),
                     method=method, max_iters=max_iters)
    result = head.execute(task_text, run_label=run_label)

    click.echo(f"response: {result.response}")
    if result.head_failure:
        click.echo(f"head failure: {result.head_failure}")
    for drone_id, history in sorted(result.threads.items()):
        tools = ", ".join(a["tool_name"] for a in history.executed_actions())
        status = "complete" if history.complete else (f"aborted: {history.aborted}" if history.aborted else "incomplete")
        click.echo(f"drone {drone_id}: {history.iteration} step(s), {status}; actions: {tools or 'none'}")
        if transcripts_out:
            out_dir = Path(transcripts_out)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / f"{run_label}.drone{drone_id}.jsonl").write_text(history.to_jsonl(), encoding="utf-8")
    click.echo(json.dumps(fleet.snapshot()))


@main.command()
@click.option("--suite", "suite_path", type=click.Path(exists=True), default=None,
              help="Task suite JSON; defaults to the bundled suite.")
@click.option("--methods", default="reacteval,react,act", help="Comma-separated method list.")
@click.option("--backend", "backend_spec", default=None,
              help="scripted:<path> or http:<endpoint>; defaults to the bundled ideal script.")
@click.option("--model", default="scripted")
@click.option("--scene", "scene_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True, help="Report JSON output path.")
@click.option("--transcripts-dir", type=click.Path(), default=None,
              help="Directory for per-task transcripts (enables later re-scoring).")
def bench(suite_path, methods, backend_spec, model, scene_path, out_path, transcripts_dir):
    """Run the benchmark sweep and write report.json / report.txt."""
    suite = load_suite(suite_path or bundled_suite_path())
    for warning in suite.warnings:
        click.echo(f"warning: {warning}", err=True)
    scene = Scene.load(scene_path or bundled_scene_path())
    backend_config = parse_backend(backend_spec or f"scripted:{bundled_perfect_script_path()}", model)
    method_list = [m.strip() for m in methods.split(",") if m.strip()]

    results = run_sweep(suite, method_list, lambda: build_backend(backend_config), scene, model=model)
    if transcripts_dir:
        _dump_transcripts(results, Path(transcripts_dir))
    report = build_report(results, suite)
    out = Path(out_path)
    write_report(report, out, out.with_suffix(".txt"))
    click.echo(format_report(report))
    click.echo(f"report written to {out} and {out.with_suffix('.txt')}")


def _dump_transcripts(results, directory: Path) -> None:
    for (method, _model), runs in results.items():
        method_dir = directory / method
        method_dir.mkdir(parents=True, exist_ok=True)
        for run in runs:
            record = {
                "task": run.task.id,
                "method": method,
                "response": run.result.response,
                "head_failure": run.result.head_failure,
                "threads": {str(d): h.to_jsonl() for d, h in run.result.threads.items()},
            }
            (method_dir / f"{run.task.id}.json").write_text(
                json.dumps(record, ensure_ascii=True, indent=2) + "\n", encoding="utf-8"
            )


@main.command()
@click.option("--transcripts", "transcripts_dir", type=click.Path(exists=True), required=True,
              help="Directory of per-task transcript JSON files (from bench --transcripts-dir).")
@click.option("--suite", "suite_path", type=click.Path(exists=True), default=None)
def score(transcripts_dir, suite_path):
    """Re-score persisted transcripts against a suite."""
    suite = load_suite(suite_path or bundled_suite_path())
    records = sorted(Path(transcripts_dir).rglob("*.json"))
    if not records:
        click.echo("no transcript records found", err=True)
        sys.exit(1)
    total = 0
    maxima = 0
    for path in records:
        record = json.loads(path.read_text(encoding="utf-8"))
        try:
            task = suite.by_id(record["task"])
        except KeyError:
            click.echo(f"{path.name}: task {record['task']!r} not in suite, skipped", err=True)
            continue
        threads = {int(d): thread_from_jsonl(text) for d, text in record.get("threads", {}).items()}
        points = score_task(task, threads, record.get("response", ""))
        failure = classify_failure(task, threads, record.get("response", ""), points,
                                   record.get("head_failure"))
        total += points
        maxima += task.max_points
        suffix = f" [{failure}]" if failure else ""
        click.echo(f"{record.get('method', '?')}/{task.id}: {points}/{task.max_points}{suffix}")
    click.echo(f"total: {total}/{maxima}")


if __name__ == "__main__":
    main()
