"""Instruction-to-plan pipeline: prompt, complete, parse, validate.

Nothing here raises for pipeline failures: every outcome, accepted or
rejected, is a ``GroundingOutcome`` that retains the instruction, the raw
model output and the template hash, so any decision can be replayed and
audited offline.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .idgen import IdAllocator
from .llm_provider import Provider, ProviderError
from .logs import JsonlWriter
from .plan_schema import (
    DefectKind,
    MovementPlan,
    PlanDefect,
    parse_plan,
    plan_to_json,
    validate_plan,
)
from .prompting import PromptTemplate, build_prompt
from .waypoint_world import WaypointWorld

__all__ = ["Grounder", "GroundingOutcome", "ground"]

RETRY_ADDENDUM = (
    "\n\nKeluaran sebelumnya bukan JSON yang valid. "
    "Ulangi jawaban untuk instruksi di atas, keluarkan JSON saja."
)


@dataclass(slots=True)
class GroundingOutcome:
    outcome_id: str
    instruction: str
    plan: MovementPlan | None
    defects: list[PlanDefect]
    provider_latency: float
    raw_output: str
    template_hash: str
    provider_id: str
    timestamp: float

    @property
    def accepted(self) -> bool:
        return self.plan is not None

    def provider_failed(self) -> bool:
        return any(d.kind is DefectKind.PROVIDER_ERROR for d in self.defects)

    def to_json(self) -> dict[str, Any]:
        return {
            "outcome_id": self.outcome_id,
            "instruction": self.instruction,
            "plan": plan_to_json(self.plan) if self.plan else None,
            "defects": [d.to_json() for d in self.defects],
            "provider_latency_s": self.provider_latency,
            "raw_output": self.raw_output,
            "template_hash": self.template_hash,
            "provider_id": self.provider_id,
            "timestamp": self.timestamp,
        }


class Grounder:
    """Binds a world, a template and a provider into a grounding pipeline."""

    def __init__(
        self,
        world: WaypointWorld,
        template: PromptTemplate,
        provider: Provider,
        *,
        outcome_log: JsonlWriter | None = None,
        clock: Callable[[], float] = time.time,
        invalid_output_retry: bool = False,
    ) -> None:
        self.world = world
        self.template = template
        self.provider = provider
        self._outcome_log = outcome_log
        self._clock = clock
        self._invalid_output_retry = invalid_output_retry
        self._outcome_ids = IdAllocator("outcome")
        self._plan_ids = IdAllocator("plan")

    def ground(self, instruction: str) -> GroundingOutcome:
        """Run the full pipeline; all failures come back as defect data."""
        bundle = build_prompt(self.template, self.world, instruction)
        outcome_id = self._outcome_ids.next()

        def finish(
            plan: MovementPlan | None,
            defects: list[PlanDefect],
            raw_output: str,
            latency: float,
            provider_id: str,
        ) -> GroundingOutcome:
            outcome = GroundingOutcome(
                outcome_id=outcome_id,
                instruction=instruction,
                plan=plan,
                defects=defects,
                provider_latency=latency,
                raw_output=raw_output,
                template_hash=bundle.template_hash,
                provider_id=provider_id,
                timestamp=self._clock(),
            )
            if self._outcome_log is not None:
                self._outcome_log.append(outcome.to_json())
            return outcome

        try:
            completion = self.provider.complete(bundle)
        except ProviderError as exc:
            defect = PlanDefect(
                DefectKind.PROVIDER_ERROR, "document", f"{exc.kind}: {exc}", "provider"
            )
            return finish(None, [defect], "", 0.0, getattr(self.provider, "provider_id", "?"))

        parsed = parse_plan(
            completion.text, source_text=instruction, plan_id=self._plan_ids.next()
        )
        if isinstance(parsed, list) and self._invalid_output_retry:
            retry_bundle = build_prompt(
                self.template, self.world, instruction + RETRY_ADDENDUM
            )
            try:
                completion = self.provider.complete(retry_bundle)
            except ProviderError as exc:
                defect = PlanDefect(
                    DefectKind.PROVIDER_ERROR, "document", f"{exc.kind}: {exc}", "provider"
                )
                return finish(
                    None, [defect], "", 0.0, getattr(self.provider, "provider_id", "?")
                )
            parsed = parse_plan(
                completion.text, source_text=instruction, plan_id=self._plan_ids.next()
            )

        if isinstance(parsed, list):
            return finish(
                None, parsed, completion.text, completion.latency, completion.provider_id
            )
        validated = validate_plan(parsed, self.world)
        if isinstance(validated, list):
            return finish(
                None, validated, completion.text, completion.latency, completion.provider_id
            )
        return finish(
            validated, [], completion.text, completion.latency, completion.provider_id
        )


def ground(
    instruction: str,
    world: WaypointWorld,
    template: PromptTemplate,
    provider: Provider,
) -> GroundingOutcome:
    """One-shot grounding without a persistent engine (CLI, tests)."""
    return Grounder(world, template, provider).ground(instruction)
