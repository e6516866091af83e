"""Movement-plan data model: strict parsing, validation and canonical JSON.

The plan language has exactly four primitives:

* ``goto``    -- move to a named waypoint (``{"waypoint": <name>}``)
* ``wait``    -- hold position for a duration (``{"duration": <seconds>}``)
* ``explore`` -- visit every waypoint of a zone (``{"zone": <name>}``)
* ``halt``    -- stop immediately, no parameters

Two wrappings are accepted on input, ``{"response": {"actions": [...]}}``
and the bare ``{"actions": [...]}``; canonical output is always the bare
form. Parsing is strict: one bad action rejects the whole plan.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union

__all__ = [
    "ActionCommand",
    "DefectKind",
    "MovementPlan",
    "ParseResult",
    "PlanDefect",
    "canonical_serialize",
    "canonical_serialize_wrapped",
    "canonicalize_name",
    "parse_plan",
    "validate_plan",
]

COMMANDS = ("goto", "wait", "explore", "halt")

_WHITESPACE_RUN = re.compile(r"\s+")


def canonicalize_name(name: str) -> str:
    """Lowercase, trim, and turn internal whitespace runs into underscores.

    Idempotent: applying it twice gives the same result.
    """
    return _WHITESPACE_RUN.sub("_", name.strip()).lower()


class DefectKind(str, Enum):
    MALFORMED_JSON = "malformed_json"
    MISSING_ACTIONS_ARRAY = "missing_actions_array"
    UNKNOWN_COMMAND = "unknown_command"
    BAD_PARAMETER = "bad_parameter"
    UNKNOWN_WAYPOINT = "unknown_waypoint"
    UNKNOWN_ZONE = "unknown_zone"
    EMPTY_PLAN = "empty_plan"
    # Produced by the grounding pipeline only, never by parsing/validation:
    # the gateway needs to tell "model unavailable" apart from "plan rejected".
    PROVIDER_ERROR = "provider_error"


@dataclass(frozen=True, slots=True)
class PlanDefect:
    """One reason a plan (or a single action in it) was rejected."""

    kind: DefectKind
    location: Union[int, str] = "document"  # action index, or "document"
    detail: str = ""
    stage: str = "parse"  # parse | validate | provider
    suggestion: str | None = None

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "kind": self.kind.value,
            "location": self.location,
            "detail": self.detail,
            "stage": self.stage,
        }
        if self.suggestion is not None:
            doc["suggestion"] = self.suggestion
        return doc


@dataclass(frozen=True, slots=True)
class ActionCommand:
    """A single plan step. Exactly one of the parameter fields is used."""

    command: str
    waypoint: str | None = None  # goto
    duration: float | None = None  # wait, seconds
    zone: str | None = None  # explore

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.command == "goto" and not self.waypoint:
            raise ValueError("goto requires a waypoint")
        if self.command == "wait":
            if self.duration is None or not math.isfinite(self.duration) or self.duration < 0:
                raise ValueError("wait requires a finite, non-negative duration")
        if self.command == "explore" and not self.zone:
            raise ValueError("explore requires a zone")

    @classmethod
    def goto(cls, waypoint: str) -> "ActionCommand":
        return cls("goto", waypoint=canonicalize_name(waypoint))

    @classmethod
    def wait(cls, duration: float) -> "ActionCommand":
        return cls("wait", duration=float(duration))

    @classmethod
    def explore(cls, zone: str) -> "ActionCommand":
        return cls("explore", zone=canonicalize_name(zone))

    @classmethod
    def halt(cls) -> "ActionCommand":
        return cls("halt")

    def parameters(self) -> dict[str, Any]:
        if self.command == "goto":
            return {"waypoint": self.waypoint}
        if self.command == "wait":
            return {"duration": self.duration}
        if self.command == "explore":
            return {"zone": self.zone}
        return {}


@dataclass(frozen=True, slots=True)
class MovementPlan:
    """An ordered action sequence plus the provenance of how it was obtained."""

    actions: tuple[ActionCommand, ...]
    source_text: str = ""
    raw_model_output: str = ""
    plan_id: str = ""

    def __len__(self) -> int:
        return len(self.actions)


ParseResult = Union[MovementPlan, list[PlanDefect]]


def _extract_json_document(text: str) -> Any | None:
    """Return the parsed JSON document embedded in ``text``, or None.

    Model output routinely wraps JSON in code fences or prose, so when the
    whole text is not valid JSON we scan for the first balanced ``{...}``
    object that parses cleanly.
    """
    try:
        return json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError):
        pass
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    candidate = text[start : i + 1]
                    try:
                        return json.loads(candidate)
                    except json.JSONDecodeError:
                        break
        start = text.find("{", start + 1)
    return None


def _find_actions_array(doc: Any) -> list[Any] | None:
    if not isinstance(doc, dict):
        return None
    actions = doc.get("actions")
    if isinstance(actions, list):
        return actions
    response = doc.get("response")
    if isinstance(response, dict):
        actions = response.get("actions")
        if isinstance(actions, list):
            return actions
    return None


def _parse_action(index: int, item: Any) -> ActionCommand | PlanDefect:
    if not isinstance(item, dict):
        return PlanDefect(
            DefectKind.UNKNOWN_COMMAND, index, f"action is not an object: {item!r}"
        )
    command = item.get("command")
    if not isinstance(command, str):
        return PlanDefect(DefectKind.UNKNOWN_COMMAND, index, "missing command tag")
    command = command.strip().lower()
    if command not in COMMANDS:
        return PlanDefect(
            DefectKind.UNKNOWN_COMMAND,
            index,
            f"unknown command {command!r}, expected one of {', '.join(COMMANDS)}",
        )
    params = item.get("parameters", {})
    if params is None:
        params = {}
    if not isinstance(params, dict):
        return PlanDefect(DefectKind.BAD_PARAMETER, index, "parameters must be an object")

    if command == "goto":
        waypoint = params.get("waypoint")
        if not isinstance(waypoint, str) or not canonicalize_name(waypoint):
            return PlanDefect(
                DefectKind.BAD_PARAMETER, index, "goto requires a non-empty waypoint name"
            )
        return ActionCommand.goto(waypoint)
    if command == "wait":
        duration = params.get("duration")
        if isinstance(duration, bool) or not isinstance(duration, (int, float)):
            return PlanDefect(
                DefectKind.BAD_PARAMETER, index, "wait requires a numeric duration"
            )
        duration = float(duration)
        if not math.isfinite(duration) or duration < 0:
            return PlanDefect(
                DefectKind.BAD_PARAMETER,
                index,
                f"wait duration must be finite and >= 0, got {duration}",
            )
        return ActionCommand.wait(duration)
    if command == "explore":
        zone = params.get("zone")
        if not isinstance(zone, str) or not canonicalize_name(zone):
            return PlanDefect(
                DefectKind.BAD_PARAMETER, index, "explore requires a non-empty zone name"
            )
        return ActionCommand.explore(zone)
    return ActionCommand.halt()


def parse_plan(
    json_text: str, *, source_text: str = "", plan_id: str = ""
) -> ParseResult:
    """Parse arbitrary model output into a MovementPlan, or report defects.

    Strict mode: any unrecognized command tag or bad parameter fails the
    whole parse; every offending action is reported with its index.
    Emptiness is not a parse error (validation flags it as ``empty_plan``).
    """
    doc = _extract_json_document(json_text)
    if doc is None:
        return [
            PlanDefect(
                DefectKind.MALFORMED_JSON, "document", "no parseable JSON object found"
            )
        ]
    actions_raw = _find_actions_array(doc)
    if actions_raw is None:
        return [
            PlanDefect(
                DefectKind.MISSING_ACTIONS_ARRAY,
                "document",
                'no "actions" array under the accepted wrappings',
            )
        ]
    actions: list[ActionCommand] = []
    defects: list[PlanDefect] = []
    for index, item in enumerate(actions_raw):
        parsed = _parse_action(index, item)
        if isinstance(parsed, PlanDefect):
            defects.append(parsed)
        else:
            actions.append(parsed)
    if defects:
        return defects
    return MovementPlan(
        actions=tuple(actions),
        source_text=source_text,
        raw_model_output=json_text,
        plan_id=plan_id,
    )


def validate_plan(plan: MovementPlan, world: "WaypointWorld") -> ParseResult:
    """Check every plan reference against the world; collect all defects.

    Returns the plan unchanged when every goto names a known waypoint,
    every explore names a known zone and the plan is non-empty.
    """
    defects: list[PlanDefect] = []
    if not plan.actions:
        defects.append(
            PlanDefect(DefectKind.EMPTY_PLAN, "document", "plan has no actions", "validate")
        )
    for index, action in enumerate(plan.actions):
        if action.command == "goto":
            assert action.waypoint is not None
            if action.waypoint not in world.waypoints:
                defects.append(
                    PlanDefect(
                        DefectKind.UNKNOWN_WAYPOINT,
                        index,
                        f"waypoint {action.waypoint!r} is not on the map",
                        "validate",
                        suggestion=world.nearest_waypoint_name(action.waypoint),
                    )
                )
        elif action.command == "explore":
            assert action.zone is not None
            if action.zone not in world.zones:
                defects.append(
                    PlanDefect(
                        DefectKind.UNKNOWN_ZONE,
                        index,
                        f"zone {action.zone!r} is not on the map",
                        "validate",
                        suggestion=world.nearest_zone_name(action.zone),
                    )
                )
    if defects:
        return defects
    return plan


def _action_to_json(action: ActionCommand) -> dict[str, Any]:
    return {"command": action.command, "parameters": action.parameters()}


def canonical_serialize(plan: MovementPlan) -> str:
    """Emit the bare canonical form, stable byte-for-byte."""
    doc = {"actions": [_action_to_json(a) for a in plan.actions]}
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def canonical_serialize_wrapped(plan: MovementPlan) -> str:
    """Emit the wrapped form used by the model-facing output contract."""
    doc = {"response": {"actions": [_action_to_json(a) for a in plan.actions]}}
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def plan_to_json(plan: MovementPlan) -> dict[str, Any]:
    """Plan as a JSON-ready dict (used by logs and the HTTP gateway)."""
    return {
        "plan_id": plan.plan_id,
        "actions": [_action_to_json(a) for a in plan.actions],
    }
