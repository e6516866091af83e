"""Pydantic request/response models for the HTTP gateway."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

from ..grounding import GroundingOutcome
from ..mission_exec import MissionHandle, ScenarioSummary
from ..plan_schema import MovementPlan

ScenarioTag = Literal[
    "single_room_short",
    "multi_room_short",
    "multi_room_long",
    "cross_zone",
    "untagged",
]


class MissionRequest(BaseModel):
    instruction: str
    scenario_tag: ScenarioTag = "untagged"
    execute: bool = False


class ActionModel(BaseModel):
    command: str
    parameters: dict[str, Any]


class PlanModel(BaseModel):
    plan_id: str
    actions: list[ActionModel]

    @classmethod
    def from_plan(cls, plan: MovementPlan) -> "PlanModel":
        return cls(
            plan_id=plan.plan_id,
            actions=[
                ActionModel(command=a.command, parameters=a.parameters())
                for a in plan.actions
            ],
        )


class DefectModel(BaseModel):
    kind: str
    location: int | str
    detail: str
    stage: str
    suggestion: Optional[str] = None


class MissionSubmitResponse(BaseModel):
    outcome_id: str
    plan: PlanModel
    mission_id: Optional[str] = None


class PlanRejectedResponse(BaseModel):
    error_kind: Literal["plan_rejected"] = "plan_rejected"
    detail: str
    outcome_id: str
    defects: list[DefectModel]

    @classmethod
    def from_outcome(cls, outcome: GroundingOutcome) -> "PlanRejectedResponse":
        return cls(
            detail="the instruction did not ground to a valid plan",
            outcome_id=outcome.outcome_id,
            defects=[DefectModel(**d.to_json()) for d in outcome.defects],
        )


class ErrorEnvelope(BaseModel):
    error_kind: str
    detail: str


class AbortResponse(BaseModel):
    mission_id: str
    phase: str


class MissionInfo(BaseModel):
    mission_id: str
    outcome_id: str
    scenario_tag: str
    phase: str
    action_index: Optional[int]
    started_at: Optional[float]
    finished_at: Optional[float]
    current_pose: Optional[dict[str, float]]
    plan: PlanModel

    @classmethod
    def from_handle(cls, handle: MissionHandle) -> "MissionInfo":
        status = handle.status
        return cls(
            mission_id=handle.mission_id,
            outcome_id=handle.outcome_id,
            scenario_tag=handle.scenario_tag,
            phase=status.phase,
            action_index=status.action_index,
            started_at=status.started_at,
            finished_at=status.finished_at,
            current_pose=status.current_pose,
            plan=PlanModel.from_plan(handle.plan),
        )


class MetricsRow(BaseModel):
    scenario_tag: str
    attempts: int
    successes: int
    success_rate: float
    mean_duration_s: Optional[float]

    @classmethod
    def from_summary(cls, summary: ScenarioSummary) -> "MetricsRow":
        return cls(
            scenario_tag=summary.scenario_tag,
            attempts=summary.attempts,
            successes=summary.successes,
            success_rate=summary.success_rate,
            mean_duration_s=summary.mean_duration,
        )


class HealthResponse(BaseModel):
    status: str
    version: str
    provider: str
    world: str
