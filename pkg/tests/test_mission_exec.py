from __future__ import annotations

import random
import time

import pytest

from quadplan.mission_exec import (
    SCENARIO_TAGS,
    MissionRecord,
    MissionWorker,
    SimulatorBusy,
    run_mission,
    summarize,
)
from quadplan.nav_sim import TICK_US, ArrivalFault, BlockCellsFault, NavSimulator, plan_path
from quadplan.plan_schema import ActionCommand, MovementPlan

TICK_S = TICK_US / 1e6


def mk_plan(*actions: ActionCommand) -> MovementPlan:
    return MovementPlan(actions=tuple(actions), plan_id="p-test")


SINGLE_ROOM = mk_plan(
    ActionCommand.goto("depan_lemari"), ActionCommand.goto("depan_meja_solder")
)


def test_single_room_mission_duration_matches_kinematics(world):
    sim = NavSimulator(world, seed=0)
    home = world.home_waypoint()
    leg1 = plan_path(world, (home.x, home.y), world.waypoints["depan_lemari"])
    wp1 = world.waypoints["depan_lemari"]
    leg2 = plan_path(world, (wp1.x, wp1.y), world.waypoints["depan_meja_solder"])
    expected = (leg1.length + leg2.length) / sim.state.speed

    record = run_mission(SINGLE_ROOM, sim, scenario_tag="single_room_short")
    assert record.success
    assert record.phase == "completed"
    assert abs(record.duration - expected) <= 2 * TICK_S + 1e-9
    assert record.duration == record.finished_at - record.started_at


def test_waypoints_reached_in_plan_order(world):
    plan = mk_plan(
        ActionCommand.goto("depan_lemari"),
        ActionCommand.goto("depan_meja_solder"),
        ActionCommand.goto("depan_pintu_lab_903_luar"),
    )
    record = run_mission(plan, NavSimulator(world, seed=0))
    reached = [e.payload["waypoint"] for e in record.events if e.kind == "waypoint_reached"]
    assert reached == ["depan_lemari", "depan_meja_solder", "depan_pintu_lab_903_luar"]


def test_halt_plan_aborts_immediately(world):
    record = run_mission(mk_plan(ActionCommand.halt()), NavSimulator(world, seed=0))
    assert record.phase == "aborted"
    assert not record.success
    assert record.duration == 0.0


def test_blocked_doorway_with_abort_policy_fails(world):
    fault = BlockCellsFault("depan_pintu_lab_903_luar", radius_m=0.5, at_time_s=2.0)
    plan = mk_plan(
        ActionCommand.goto("depan_lemari"),
        ActionCommand.goto("depan_pintu_lab_903_luar"),
        ActionCommand.goto("depan_meja_solder"),
    )
    sim = NavSimulator(world, seed=0, faults=[fault])
    record = run_mission(plan, sim, scenario_tag="multi_room_short")
    assert record.phase == "failed"
    assert not record.success
    reached = [e.payload["waypoint"] for e in record.events if e.kind == "waypoint_reached"]
    assert reached == ["depan_lemari"]  # never gets past the blocked goto


def test_skip_action_policy_continues_past_failures(world):
    sim = NavSimulator(world, seed=0, faults=[ArrivalFault(1.0)])
    plan = mk_plan(ActionCommand.goto("depan_lemari"), ActionCommand.wait(1.0))
    record = run_mission(plan, sim, policy="skip_action")
    assert record.phase == "completed"  # goto failed, wait still ran
    kinds = [e.kind for e in record.events]
    assert "plan_failed" in kinds and "wait_finished" in kinds


def test_retry_once_then_abort_retries_exactly_once(world):
    sim = NavSimulator(world, seed=0, faults=[ArrivalFault(1.0)])
    plan = mk_plan(ActionCommand.goto("depan_lemari"))
    record = run_mission(plan, sim, policy="retry_once_then_abort")
    assert record.phase == "failed"
    assert sum(e.kind == "plan_failed" for e in record.events) == 2


def test_duration_is_additive_over_actions(world):
    plan = mk_plan(
        ActionCommand.goto("depan_lemari"),
        ActionCommand.wait(1.3),
        ActionCommand.goto("depan_meja_solder"),
    )
    sim = NavSimulator(world, seed=0)
    home = world.home_waypoint()
    leg1 = plan_path(world, (home.x, home.y), world.waypoints["depan_lemari"])
    wp1 = world.waypoints["depan_lemari"]
    leg2 = plan_path(world, (wp1.x, wp1.y), world.waypoints["depan_meja_solder"])
    expected = leg1.length / 0.8 + 1.3 + leg2.length / 0.8
    record = run_mission(plan, sim)
    assert abs(record.duration - expected) <= len(plan.actions) * TICK_S + 1e-9


def test_abort_mid_mission_stops_events(world):
    events_seen = 0

    def on_event(event):
        nonlocal events_seen
        events_seen += 1

    def should_abort():
        return events_seen >= 25

    record = run_mission(
        mk_plan(ActionCommand.goto("lift_jauh")),
        NavSimulator(world, seed=0),
        on_event=on_event,
        should_abort=should_abort,
    )
    assert record.phase == "aborted"
    assert len(record.events) <= 26


def test_rejects_unknown_policy_and_tag(world):
    sim = NavSimulator(world, seed=0)
    with pytest.raises(ValueError, match="policy"):
        run_mission(SINGLE_ROOM, sim, policy="improvise")
    with pytest.raises(ValueError, match="tag"):
        run_mission(SINGLE_ROOM, sim, scenario_tag="warehouse")


def test_status_transitions_are_legal_under_random_abort_timing(world):
    rng = random.Random(7)
    plans = [
        SINGLE_ROOM,
        mk_plan(ActionCommand.goto("ruang_pantry")),
        mk_plan(ActionCommand.goto("depan_lemari"), ActionCommand.wait(0.4)),
        mk_plan(ActionCommand.explore("pantry")),
        mk_plan(ActionCommand.goto("depan_lemari"), ActionCommand.halt()),
    ]
    for trial in range(30):
        plan = plans[trial % len(plans)]
        abort_after = rng.randrange(0, 120)
        seen = 0
        statuses = []

        def on_event(event):
            nonlocal seen
            seen += 1

        record = run_mission(
            plan,
            NavSimulator(world, seed=trial),
            on_status=statuses.append,
            on_event=on_event,
            should_abort=lambda: seen >= abort_after,
        )
        phases = [s.phase for s in statuses]
        assert phases[0] == "executing"
        assert phases[-1] in ("completed", "failed", "aborted")
        assert all(p == "executing" for p in phases[:-1])
        indexes = [s.action_index for s in statuses if s.phase == "executing"]
        assert indexes == sorted(set(indexes))
        assert record.phase == phases[-1]
        finished = [s.finished_at for s in statuses if s.finished_at is not None]
        assert len(finished) == 1


# --- summarize ---------------------------------------------------------------


def _record(tag: str, success: bool, duration: float) -> MissionRecord:
    return MissionRecord(
        mission_id="m",
        outcome_id="o",
        scenario_tag=tag,
        duration=duration,
        success=success,
        phase="completed" if success else "failed",
        started_at=0.0,
        finished_at=duration,
        end_to_end=duration,
    )


def test_summarize_reproduces_reference_rates():
    records = (
        [_record("single_room_short", True, 45.0)] * 15
        + [_record("multi_room_short", True, 68.0)] * 24
        + [_record("multi_room_short", False, 5.0)]
        + [_record("multi_room_long", True, 90.0)] * 18
        + [_record("multi_room_long", False, 8.0)] * 2
        + [_record("cross_zone", True, 131.0)] * 20
    )
    summaries = summarize(records)
    by_tag = {s.scenario_tag: s for s in summaries}
    assert by_tag["single_room_short"].success_rate == 100.0
    assert by_tag["single_room_short"].attempts == 15
    assert by_tag["multi_room_short"].success_rate == 96.0
    assert by_tag["multi_room_short"].attempts == 25
    assert by_tag["multi_room_long"].success_rate == 90.0
    assert by_tag["multi_room_long"].attempts == 20
    assert by_tag["cross_zone"].success_rate == 100.0
    # failed trials do not pollute the mean over successes
    assert by_tag["multi_room_short"].mean_duration == 68.0
    assert by_tag["multi_room_long"].mean_duration == 90.0


def test_summarize_accounting_and_order():
    records = [
        _record("cross_zone", True, 1.0),
        _record("single_room_short", True, 1.0),
        _record("untagged", False, 1.0),
        _record("multi_room_long", True, 1.0),
    ]
    summaries = summarize(records)
    assert [s.scenario_tag for s in summaries] == [
        "single_room_short",
        "multi_room_long",
        "cross_zone",
        "untagged",
    ]
    assert sum(s.attempts for s in summaries) == len(records)
    assert summarize([]) == []
    no_success = summarize([_record("untagged", False, 3.0)])
    assert no_success[0].mean_duration is None
    assert no_success[0].success_rate == 0.0


# --- worker ------------------------------------------------------------------


def test_worker_runs_missions_and_keeps_records(world):
    worker = MissionWorker(NavSimulator(world, seed=0))
    try:
        handle = worker.submit(SINGLE_ROOM, mission_id="m-1", scenario_tag="single_room_short")
        assert handle.wait_terminal(10)
        assert handle.phase() == "completed"
        assert worker.get("m-1") is handle
        records = worker.records()
        assert len(records) == 1 and records[0].success
        # a follow-up mission is accepted once the first is terminal
        handle2 = worker.submit(mk_plan(ActionCommand.wait(0.2)), mission_id="m-2")
        assert handle2.wait_terminal(10)
    finally:
        worker.shutdown()


def test_worker_rejects_concurrent_missions_and_aborts(world):
    sim = NavSimulator(world, seed=0, realtime=True)
    worker = MissionWorker(sim)
    try:
        handle = worker.submit(mk_plan(ActionCommand.wait(30.0)), mission_id="m-slow")
        for _ in range(100):
            if handle.phase() == "executing":
                break
            time.sleep(0.01)
        with pytest.raises(SimulatorBusy):
            worker.submit(SINGLE_ROOM, mission_id="m-2")
        started = time.monotonic()
        phase = worker.abort("m-slow")
        assert phase == "aborted"
        assert time.monotonic() - started < 2.0
        # idempotent on terminal missions
        assert worker.abort("m-slow") == "aborted"
        with pytest.raises(KeyError):
            worker.abort("bogus")
    finally:
        worker.shutdown()
