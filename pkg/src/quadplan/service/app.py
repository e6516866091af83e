"""HTTP gateway: mission submission, execution control, live telemetry.

All endpoints live under /v1 and speak JSON; errors share the
``{"error_kind", "detail"}`` envelope. Mission telemetry is exposed as a
server-sent event stream that replays the full history before following
live frames, resumable via the standard Last-Event-ID header.
"""

from __future__ import annotations

import json
from contextlib import asynccontextmanager
from typing import Iterator

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .. import __version__
from ..config import ServiceConfig
from ..grounding import Grounder
from ..idgen import IdAllocator
from ..llm_provider import HttpProvider, MockProvider
from ..logs import JsonlWriter
from ..mission_exec import (
    TERMINAL_PHASES,
    MissionHandle,
    MissionWorker,
    SimulatorBusy,
    summarize,
)
from ..nav_sim import NavSimulator, fault_from_json
from ..prompting import load_template
from ..waypoint_world import load_world
from .models import (
    AbortResponse,
    ErrorEnvelope,
    HealthResponse,
    MetricsRow,
    MissionInfo,
    MissionRequest,
    MissionSubmitResponse,
    PlanModel,
    PlanRejectedResponse,
)

SSE_HEARTBEAT_S = 5.0  # keep-alive comment cadence during idle stretches


def _envelope(status_code: int, error_kind: str, detail: str, **extra) -> JSONResponse:
    body = {"error_kind": error_kind, "detail": detail}
    body.update(extra)
    return JSONResponse(status_code=status_code, content=body)


def _render_frame(index: int, frame_type: str, payload: dict) -> str:
    data = json.dumps(payload, separators=(",", ":"))
    return f"id: {index}\nevent: {frame_type}\ndata: {data}\n\n"


def _event_stream(handle: MissionHandle, start_index: int) -> Iterator[str]:
    index = start_index
    while True:
        frames = handle.frames_since(index, timeout=SSE_HEARTBEAT_S)
        if not frames:
            if handle.is_terminal() and not handle.frames_since(index):
                return
            yield ": keep-alive\n\n"
            continue
        for frame_type, payload in frames:
            index += 1
            yield _render_frame(index, frame_type, payload)
            if frame_type == "status" and payload.get("phase") in TERMINAL_PHASES:
                return


def create_app(config: ServiceConfig) -> FastAPI:
    config.validate()
    world = load_world(config.map_path)
    template = load_template(config.template_path, world)
    if config.use_mock:
        provider = MockProvider(world)
    else:
        assert config.provider is not None
        provider = HttpProvider(config.provider)

    sim = NavSimulator(
        world,
        cruise_speed=config.cruise_speed,
        seed=0,
        realtime=config.realtime,
        faults=[fault_from_json(doc, world) for doc in config.faults],
    )
    worker = MissionWorker(sim, policy=config.recovery_policy)
    outcome_log = JsonlWriter(config.outcome_log) if config.outcome_log else None
    grounder = Grounder(
        world,
        template,
        provider,
        outcome_log=outcome_log,
        invalid_output_retry=config.invalid_output_retry,
    )
    if config.record_log:
        record_log = JsonlWriter(config.record_log)
        worker.set_record_sink(lambda record: record_log.append(record.to_json()))
    mission_ids = IdAllocator("mission")

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        worker.shutdown()

    app = FastAPI(title="quadplan gateway", version=__version__, lifespan=lifespan)
    app.state.world = world
    app.state.worker = worker
    app.state.grounder = grounder

    @app.exception_handler(RequestValidationError)
    async def _bad_request(_: Request, exc: RequestValidationError) -> JSONResponse:
        return _envelope(400, "bad_request", str(exc.errors()[:3]))

    @app.post("/v1/missions")
    def submit_mission(request: MissionRequest) -> Response:
        if not request.instruction.strip():
            return _envelope(400, "bad_request", "instruction is empty")
        outcome = grounder.ground(request.instruction)
        if outcome.provider_failed():
            return _envelope(
                502,
                "provider_unavailable",
                outcome.defects[0].detail,
                outcome_id=outcome.outcome_id,
            )
        if outcome.plan is None:
            rejected = PlanRejectedResponse.from_outcome(outcome)
            return JSONResponse(status_code=422, content=rejected.model_dump())
        if not request.execute:
            body = MissionSubmitResponse(
                outcome_id=outcome.outcome_id, plan=PlanModel.from_plan(outcome.plan)
            )
            return JSONResponse(status_code=200, content=body.model_dump())
        try:
            handle = worker.submit(
                outcome.plan,
                mission_id=mission_ids.next(),
                scenario_tag=request.scenario_tag,
                outcome_id=outcome.outcome_id,
                grounding_latency=outcome.provider_latency,
            )
        except SimulatorBusy as exc:
            return _envelope(409, "busy", str(exc))
        body = MissionSubmitResponse(
            outcome_id=outcome.outcome_id,
            plan=PlanModel.from_plan(outcome.plan),
            mission_id=handle.mission_id,
        )
        return JSONResponse(status_code=202, content=body.model_dump())

    @app.post("/v1/missions/{mission_id}/abort", response_model=AbortResponse)
    def abort_mission(mission_id: str) -> Response:
        try:
            phase = worker.abort(mission_id)
        except KeyError:
            return _envelope(404, "unknown_mission", f"no mission {mission_id!r}")
        return JSONResponse(
            content=AbortResponse(mission_id=mission_id, phase=phase).model_dump()
        )

    @app.get("/v1/missions")
    def list_missions() -> list[MissionInfo]:
        return [MissionInfo.from_handle(h) for h in worker.missions()]

    @app.get("/v1/missions/{mission_id}")
    def mission_info(mission_id: str) -> Response:
        try:
            handle = worker.get(mission_id)
        except KeyError:
            return _envelope(404, "unknown_mission", f"no mission {mission_id!r}")
        return JSONResponse(content=MissionInfo.from_handle(handle).model_dump())

    @app.get("/v1/missions/{mission_id}/events")
    def mission_events(mission_id: str, request: Request) -> Response:
        try:
            handle = worker.get(mission_id)
        except KeyError:
            return _envelope(404, "unknown_mission", f"no mission {mission_id!r}")
        last_id = request.headers.get("last-event-id")
        start_index = 0
        if last_id is not None:
            try:
                start_index = max(0, int(last_id))
            except ValueError:
                start_index = 0
        return StreamingResponse(
            _event_stream(handle, start_index),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.get("/v1/map")
    def get_map() -> Response:
        return Response(
            content=world.canonical_document(), media_type="application/json"
        )

    @app.get("/v1/metrics")
    def get_metrics() -> list[MetricsRow]:
        return [MetricsRow.from_summary(s) for s in summarize(worker.records())]

    @app.get("/v1/healthz", response_model=HealthResponse)
    def healthz() -> HealthResponse:
        return HealthResponse(
            status="ok",
            version=__version__,
            provider=provider.provider_id,
            world=world.name,
        )

    if config.console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.console_dir, html=True))

    return app
