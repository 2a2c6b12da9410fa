"""Model backends and robust parsing of structured agent outputs.

Two backends share one interface: an HTTP client for chat-completions style
endpoints, and a scripted backend that replays canned outputs keyed by
(thread, template, ordinal) so that whole sessions are reproducible
byte-for-byte. Parsing is tolerant of code fences, surrounding prose and the
common key-spelling variants, but strict about required keys and types.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import requests

from .prompts import render

API_KEY_ENV = "AEROREACT_API_KEY"


class GatewayError(Exception):
    """Base class for gateway failures."""


class TransportError(GatewayError):
    """The HTTP backend could not complete a request."""


class ScriptMissError(GatewayError):
    """The scripted backend had no entry for a requested completion."""


class ParseError(GatewayError):
    """Raw model output could not be parsed against a schema."""


class StructuredOutputError(GatewayError):
    """Parsing still failed after the configured number of repair retries."""


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    model_name: str = "scripted"
    endpoint: Optional[str] = None
    script_path: Optional[str] = None
    max_retries: int = 1

    def __post_init__(self) -> None:
        if self.kind == "http":
            if not self.endpoint:
                raise ValueError("http backend requires an endpoint")
            if self.script_path:
                raise ValueError("http backend does not take a script_path")
        elif self.kind == "scripted":
            if not self.script_path:
                raise ValueError("scripted backend requires a script_path")
            if self.endpoint:
                raise ValueError("scripted backend does not take an endpoint")
        else:
            raise ValueError(f"unknown backend kind {self.kind!r}")


@dataclass(frozen=True)
class StructuredOutput:
    raw_text: str
    parsed: dict
    schema_id: str
    retries: int = 0


class ScriptedBackend:
    """Replays canned outputs from a JSONL script.

    Each line is {"thread": ..., "template": ..., "ordinal": n, "output": ...}.
    Ordinals count calls per (thread, template) pair starting at 1, so repair
    retries consume the next entry. A thread of "*" matches any thread, which
    keeps hand-written fixtures small.
    """

    def __init__(self, entries: Iterable[dict] = (), model_name: str = "scripted"):
        self.model_name = model_name
        self._exact: dict[tuple[str, str], dict[int, str]] = {}
        self._wild: dict[str, dict[int, str]] = {}
        self._counters: dict[tuple[str, str], int] = {}
        for entry in entries:
            self.add(entry["thread"], entry["template"], entry["ordinal"], entry["output"])

    @classmethod
    def from_path(cls, path: str | Path, model_name: str = "scripted") -> "ScriptedBackend":
        entries = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
        return cls(entries, model_name=model_name)

    def add(self, thread: str, template: str, ordinal: int, output: str) -> None:
        if thread == "*":
            self._wild.setdefault(template, {})[ordinal] = output
        else:
            self._exact.setdefault((thread, template), {})[ordinal] = output

    def complete(self, prompt: str, *, thread: str, template_id: str) -> str:
        key = (thread, template_id)
        ordinal = self._counters.get(key, 0) + 1
        self._counters[key] = ordinal
        output = self._exact.get(key, {}).get(ordinal)
        if output is None:
            output = self._wild.get(template_id, {}).get(ordinal)
        if output is None:
            raise ScriptMissError(
                f"no scripted output for thread={thread!r} template={template_id!r} ordinal={ordinal}"
            )
        return output


class HttpBackend:
    """Minimal chat-completions client: POST {model, messages} and return the
    first choice's message content."""

    def __init__(self, endpoint: str, model_name: str, api_key: Optional[str] = None, timeout: float = 120.0):
        self.endpoint = endpoint
        self.model_name = model_name
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout

    def complete(self, prompt: str, *, thread: str, template_id: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            response = requests.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"request to {self.endpoint} failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(f"backend returned HTTP {response.status_code}: {response.text[:200]}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"malformed completion response: {exc}") from exc


def build_backend(config: BackendConfig):
    if config.kind == "scripted":
        return ScriptedBackend.from_path(config.script_path, model_name=config.model_name)
    return HttpBackend(config.endpoint, config.model_name)


# --- structured output parsing ---------------------------------------------

# The prompt wording drifted between underscores and spaces historically;
# accept both and canonicalize to snake_case.
_KEY_ALIASES = {
    "reason": "reasoning",
    "intended action": "intended_action",
    "evaluation": "evaluation_summary",
    "evaluation summary": "evaluation_summary",
    "end flag": "end_flag",
    "next steps notes": "next_steps_notes",
    "next step notes": "next_steps_notes",
    "function call": "function_call",
    "response to user": "response_to_user",
}

# schema_id -> {key: (type, required, default)}
_RECORD_SCHEMAS: dict[str, dict[str, tuple[type, bool, object]]] = {
    "reason": {
        "reasoning": (str, True, None),
        "intended_action": (str, True, None),
    },
    "reason_with_end_flag": {
        "reasoning": (str, True, None),
        "intended_action": (str, True, None),
        "end_flag": (bool, True, None),
    },
    "function_call": {
        "function_call": (str, True, None),
        "parameters": (dict, False, {}),
    },
    "evaluate": {
        "evaluation_summary": (str, True, None),
        "end_flag": (bool, True, None),
        "next_steps_notes": (str, True, None),
    },
}

SCHEMA_IDS = tuple(_RECORD_SCHEMAS) + ("plan", "text")

# Which schema each template's output is parsed against.
TEMPLATE_SCHEMAS = {
    "plan": "plan",
    "reason": "reason",
    "reason_with_end_flag": "reason_with_end_flag",
    "act": "function_call",
    "act_direct": "function_call",
    "evaluate": "evaluate",
    "respond": "text",
}

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)
_DRONE_KEY_RE = re.compile(r"^[1-9][0-9]*$")


def _extract_json_object(text: str) -> dict:
    """Locate and load the outermost JSON object in free-form model output."""
    candidates = [text]
    fenced = _FENCE_RE.search(text)
    if fenced:
        candidates.insert(0, fenced.group(1))
    for candidate in candidates:
        candidate = candidate.strip()
        try:
            loaded = json.loads(candidate)
            if isinstance(loaded, dict):
                return loaded
        except json.JSONDecodeError:
            pass
        sliced = _balanced_object(candidate)
        if sliced is not None:
            try:
                loaded = json.loads(sliced)
                if isinstance(loaded, dict):
                    return loaded
            except json.JSONDecodeError:
                pass
    raise ParseError("no JSON object found in output")


def _balanced_object(text: str) -> Optional[str]:
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if escaped:
            escaped = False
            continue
        if ch == "\\" and in_string:
            escaped = True
            continue
        if ch == '"':
            in_string = not in_string
            continue
        if in_string:
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def _canonical_keys(record: dict) -> dict:
    out = {}
    for key, value in record.items():
        canon = _KEY_ALIASES.get(key.strip().lower().replace("-", " "), key) if isinstance(key, str) else key
        out[canon] = value
    return out


def _check_record(record: dict, schema: dict[str, tuple[type, bool, object]]) -> dict:
    record = _canonical_keys(record)
    problems = []
    result: dict = {}
    for key, (expected_type, required, default) in schema.items():
        if key not in record:
            if required:
                problems.append(f"missing key {key!r}")
            else:
                result[key] = default
            continue
        value = record[key]
        if expected_type is bool:
            if not isinstance(value, bool):
                problems.append(f"key {key!r} must be a boolean, got {type(value).__name__}")
                continue
        elif expected_type is str:
            if not isinstance(value, str):
                problems.append(f"key {key!r} must be a string, got {type(value).__name__}")
                continue
        elif expected_type is dict:
            if not isinstance(value, dict):
                problems.append(f"key {key!r} must be an object, got {type(value).__name__}")
                continue
        result[key] = value
    if problems:
        raise ParseError("; ".join(problems))
    return result


_PLAN_ENTRY_SCHEMA: dict[str, tuple[type, bool, object]] = {
    "plan": (str, True, None),
    "expected_outcome": (str, True, None),
    "end_flag": (bool, True, None),
}


def _check_plan(record: dict) -> dict:
    record = _canonical_keys(record)
    problems = []
    result: dict = {"response_to_user": ""}
    response = record.pop("response_to_user", "")
    if not isinstance(response, str):
        problems.append("key 'response_to_user' must be a string")
    else:
        result["response_to_user"] = response
    for key, value in record.items():
        if not isinstance(key, str) or not _DRONE_KEY_RE.match(key):
            problems.append(f"drone key {key!r} is not a positive integer string")
            continue
        if not isinstance(value, dict):
            problems.append(f"drone entry {key!r} must be an object")
            continue
        try:
            result[key] = _check_record(value, _PLAN_ENTRY_SCHEMA)
        except ParseError as exc:
            problems.append(f"drone entry {key!r}: {exc}")
    if problems:
        raise ParseError("; ".join(problems))
    return result


def parse_structured(raw_text: str, schema_id: str) -> dict:
    """Extract and validate a structured record from raw model output."""
    if schema_id == "text":
        return {"text": raw_text.strip()}
    record = _extract_json_object(raw_text)
    if schema_id == "plan":
        return _check_plan(record)
    schema = _RECORD_SCHEMAS.get(schema_id)
    if schema is None:
        raise ParseError(f"unknown schema {schema_id!r}")
    return _check_record(record, schema)


_REPAIR_INSTRUCTION = (
    "\n\nYour previous reply could not be parsed: {error}\n"
    "Reply again with only a single valid JSON object containing the required keys."
)


class LlmGateway:
    """Render-complete-parse pipeline with a bounded repair loop."""

    def __init__(self, backend, max_retries: int = 1):
        self.backend = backend
        self.max_retries = max_retries

    def complete(self, *, thread: str, template_id: str, context: dict,
                 schema_id: Optional[str] = None) -> StructuredOutput:
        schema_id = schema_id or TEMPLATE_SCHEMAS[template_id]
        prompt = render(template_id, context)
        raw = self.backend.complete(prompt, thread=thread, template_id=template_id)
        retries = 0
        while True:
            try:
                parsed = parse_structured(raw, schema_id)
                return StructuredOutput(raw_text=raw, parsed=parsed, schema_id=schema_id, retries=retries)
            except ParseError as exc:
                if retries >= self.max_retries:
                    raise StructuredOutputError(
                        f"output for {template_id!r} failed to parse after {retries + 1} attempt(s): {exc}"
                    ) from exc
                retries += 1
                repair_prompt = prompt + _REPAIR_INSTRUCTION.format(error=exc)
                raw = self.backend.complete(repair_prompt, thread=thread, template_id=template_id)
