"""System-prompt assembly for the motion-planner role.

A template is data (a JSON file), not code: role preamble, per-command
usage docs, constraint rules, few-shot exemplars and the output contract.
Rendering injects the live waypoint vocabulary so the model can only name
waypoints that exist; the render is deterministic byte-for-byte and
hashed so a stale prompt is detectable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from .plan_schema import MovementPlan, parse_plan, validate_plan
from .waypoint_world import WaypointWorld

__all__ = [
    "PromptBundle",
    "PromptTemplate",
    "TemplateError",
    "build_prompt",
    "default_template",
    "load_template",
    "render_vocabulary_block",
]

VOCABULARY_HEADER = "DAFTAR WAYPOINT (hanya nama-nama ini yang boleh dipakai):"
VOCABULARY_FOOTER = "AKHIR DAFTAR WAYPOINT."


class TemplateError(ValueError):
    """The template file is malformed or its few-shots do not validate."""


@dataclass(frozen=True, slots=True)
class PromptTemplate:
    preamble: str
    primitive_docs: dict[str, str]  # command -> usage text
    constraint_rules: tuple[str, ...]
    few_shots: tuple[tuple[str, str], ...]  # (instruction, expected_json)
    output_contract: str

    def validate_against(self, world: WaypointWorld) -> None:
        """Every few-shot output must itself be a plan the validator accepts."""
        for i, (_, expected_json) in enumerate(self.few_shots):
            parsed = parse_plan(expected_json)
            if not isinstance(parsed, MovementPlan):
                raise TemplateError(f"few-shot {i} does not parse: {parsed[0].detail}")
            validated = validate_plan(parsed, world)
            if not isinstance(validated, MovementPlan):
                raise TemplateError(
                    f"few-shot {i} fails validation: {validated[0].detail}"
                )


@dataclass(frozen=True, slots=True)
class PromptBundle:
    system_text: str
    user_text: str
    template_hash: str


def render_vocabulary_block(world: WaypointWorld) -> str:
    lines = [VOCABULARY_HEADER]
    for name, display_name, zone in world.vocabulary():
        lines.append(f"- {name} | {display_name} | zona: {zone}")
    lines.append(VOCABULARY_FOOTER)
    return "\n".join(lines)


def render_system_text(template: PromptTemplate, world: WaypointWorld) -> str:
    parts = [template.preamble.strip()]

    primitive_lines = ["PERINTAH YANG TERSEDIA:"]
    for command in sorted(template.primitive_docs):
        primitive_lines.append(f"- {command}: {template.primitive_docs[command]}")
    parts.append("\n".join(primitive_lines))

    rule_lines = ["ATURAN:"]
    for i, rule in enumerate(template.constraint_rules, start=1):
        rule_lines.append(f"{i}. {rule}")
    parts.append("\n".join(rule_lines))

    parts.append(render_vocabulary_block(world))

    shot_lines = ["CONTOH:"]
    for i, (instruction, expected_json) in enumerate(template.few_shots, start=1):
        shot_lines.append(f"Instruksi {i}: {instruction}")
        shot_lines.append(f"Jawaban {i}: {expected_json}")
    parts.append("\n".join(shot_lines))

    parts.append(template.output_contract.strip())
    return "\n\n".join(parts) + "\n"


def build_prompt(
    template: PromptTemplate, world: WaypointWorld, instruction: str
) -> PromptBundle:
    """Render the full prompt for one instruction; pure and deterministic."""
    if not instruction.strip():
        raise ValueError("instruction is empty")
    system_text = render_system_text(template, world)
    digest = hashlib.sha256(system_text.encode("utf-8")).hexdigest()
    return PromptBundle(
        system_text=system_text, user_text=instruction, template_hash=digest
    )


def _template_from_doc(doc: dict[str, Any], world: WaypointWorld | None) -> PromptTemplate:
    try:
        template = PromptTemplate(
            preamble=str(doc["preamble"]),
            primitive_docs={str(k): str(v) for k, v in doc["primitive_docs"].items()},
            constraint_rules=tuple(str(r) for r in doc["constraint_rules"]),
            few_shots=tuple(
                (str(shot["instruction"]), str(shot["expected_json"]))
                for shot in doc["few_shots"]
            ),
            output_contract=str(doc["output_contract"]),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise TemplateError(f"template document is malformed: {exc!r}") from None
    if world is not None:
        template.validate_against(world)
    return template


def load_template(path: str | Path, world: WaypointWorld | None = None) -> PromptTemplate:
    """Load a template file; with a world, few-shots are checked right away."""
    path = Path(path)
    if not path.exists():
        raise TemplateError(f"template file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TemplateError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return _template_from_doc(doc, world)


def default_template(world: WaypointWorld) -> PromptTemplate:
    """The shipped template, validated against the given world."""
    source = resources.files("quadplan.data").joinpath("default_template.json")
    doc = json.loads(source.read_text(encoding="utf-8"))
    return _template_from_doc(doc, world)
