"""Mission lifecycle: run a validated plan action-by-action on the simulator.

A mission moves through pending -> executing(i) -> completed | failed |
aborted, with the action index strictly increasing. The long-lived
``MissionWorker`` serializes execution (one mission at a time) while
status snapshots and the event stream stay readable from any thread.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from queue import Queue
from typing import Any, Callable

from .nav_sim import NavSimulator, SimEvent
from .plan_schema import MovementPlan

__all__ = [
    "IllegalTransition",
    "MissionHandle",
    "MissionRecord",
    "MissionStatus",
    "MissionWorker",
    "RECOVERY_POLICIES",
    "SCENARIO_TAGS",
    "ScenarioSummary",
    "SimulatorBusy",
    "run_mission",
    "summarize",
]

SCENARIO_TAGS = (
    "single_room_short",
    "multi_room_short",
    "multi_room_long",
    "cross_zone",
    "untagged",
)

RECOVERY_POLICIES = ("abort_mission", "skip_action", "retry_once_then_abort")

TERMINAL_PHASES = frozenset({"completed", "failed", "aborted"})

_LEGAL_TRANSITIONS = {
    "pending": {"executing"},
    "executing": {"executing", "completed", "failed", "aborted"},
}


class IllegalTransition(RuntimeError):
    pass


class SimulatorBusy(RuntimeError):
    """A mission is already executing; callers must queue or reject."""


@dataclass(slots=True)
class MissionStatus:
    phase: str = "pending"
    action_index: int | None = None
    started_at: float | None = None  # sim seconds
    finished_at: float | None = None
    current_pose: dict[str, float] | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "phase": self.phase,
            "action_index": self.action_index,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "current_pose": self.current_pose,
        }


@dataclass(slots=True)
class MissionRecord:
    mission_id: str
    outcome_id: str
    scenario_tag: str
    duration: float  # sim seconds of execution
    success: bool
    phase: str
    started_at: float
    finished_at: float
    end_to_end: float  # execution + grounding latency
    events: list[SimEvent] = field(default_factory=list)

    def to_json(self, *, include_events: bool = True) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "mission_id": self.mission_id,
            "outcome_id": self.outcome_id,
            "scenario_tag": self.scenario_tag,
            "duration_s": self.duration,
            "end_to_end_s": self.end_to_end,
            "success": self.success,
            "phase": self.phase,
            "started_at_s": self.started_at,
            "finished_at_s": self.finished_at,
        }
        if include_events:
            doc["events"] = [event.to_json() for event in self.events]
        return doc


@dataclass(frozen=True, slots=True)
class ScenarioSummary:
    scenario_tag: str
    attempts: int
    successes: int
    success_rate: float  # percent
    mean_duration: float | None  # over successful trials

    def to_json(self) -> dict[str, Any]:
        return {
            "scenario_tag": self.scenario_tag,
            "attempts": self.attempts,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "mean_duration_s": self.mean_duration,
        }


class _StatusTracker:
    """Applies transitions, enforcing the whitelist, and notifies observers."""

    def __init__(self, on_status: Callable[[MissionStatus], None] | None) -> None:
        self.status = MissionStatus()
        self._on_status = on_status

    def transition(self, phase: str, sim: NavSimulator, action_index: int | None = None) -> None:
        current = self.status.phase
        if phase not in _LEGAL_TRANSITIONS.get(current, frozenset()):
            raise IllegalTransition(f"{current} -> {phase}")
        if phase == "executing" and current == "executing":
            assert action_index is not None
            if self.status.action_index is not None and action_index <= self.status.action_index:
                raise IllegalTransition(
                    f"executing({self.status.action_index}) -> executing({action_index})"
                )
        self.status.phase = phase
        self.status.action_index = action_index if phase == "executing" else self.status.action_index
        now = sim.state.time_us / 1e6
        if phase == "executing" and self.status.started_at is None:
            self.status.started_at = now
        if phase in TERMINAL_PHASES:
            self.status.finished_at = now
        self.status.current_pose = {
            "x": sim.state.x,
            "y": sim.state.y,
            "heading": sim.state.heading,
        }
        if self._on_status is not None:
            # observers get an immutable snapshot, not the live tracker state
            self._on_status(
                MissionStatus(
                    phase=self.status.phase,
                    action_index=self.status.action_index,
                    started_at=self.status.started_at,
                    finished_at=self.status.finished_at,
                    current_pose=dict(self.status.current_pose),
                )
            )


def run_mission(
    plan: MovementPlan,
    sim: NavSimulator,
    *,
    policy: str = "abort_mission",
    scenario_tag: str = "untagged",
    mission_id: str = "",
    outcome_id: str = "",
    grounding_latency: float = 0.0,
    on_event: Callable[[SimEvent], None] | None = None,
    on_status: Callable[[MissionStatus], None] | None = None,
    should_abort: Callable[[], bool] | None = None,
) -> MissionRecord:
    """Execute a validated plan to a terminal phase and record everything."""
    if policy not in RECOVERY_POLICIES:
        raise ValueError(f"unknown recovery policy {policy!r}")
    if scenario_tag not in SCENARIO_TAGS:
        raise ValueError(f"unknown scenario tag {scenario_tag!r}")

    events: list[SimEvent] = []

    def emit(event: SimEvent) -> None:
        events.append(event)
        if on_event is not None:
            on_event(event)

    tracker = _StatusTracker(on_status)
    should_abort = should_abort or (lambda: False)
    started_us = sim.state.time_us
    phase = "completed"

    index = 0
    while index < len(plan.actions):
        tracker.transition("executing", sim, action_index=index)
        if should_abort():
            phase = "aborted"
            break
        outcome = sim.execute(plan.actions[index], emit=emit, should_abort=should_abort)
        if outcome == "plan_failed" and policy == "retry_once_then_abort":
            outcome = sim.execute(plan.actions[index], emit=emit, should_abort=should_abort)
        if outcome == "aborted":
            phase = "aborted"
            break
        if outcome == "halted":
            phase = "aborted"
            break
        if outcome == "plan_failed":
            if policy == "skip_action":
                index += 1
                continue
            phase = "failed"
            break
        index += 1

    tracker.transition(phase, sim)
    finished_us = sim.state.time_us
    duration = (finished_us - started_us) / 1e6
    return MissionRecord(
        mission_id=mission_id,
        outcome_id=outcome_id,
        scenario_tag=scenario_tag,
        duration=duration,
        success=phase == "completed",
        phase=phase,
        started_at=started_us / 1e6,
        finished_at=finished_us / 1e6,
        end_to_end=duration + grounding_latency,
        events=events,
    )


def summarize(records: list[MissionRecord]) -> list[ScenarioSummary]:
    """Per-category aggregates; mean duration is over successful trials only."""
    grouped: dict[str, list[MissionRecord]] = {}
    for record in records:
        grouped.setdefault(record.scenario_tag, []).append(record)
    summaries = []
    for tag in SCENARIO_TAGS:
        if tag not in grouped:
            continue
        rows = grouped[tag]
        successes = [r for r in rows if r.success]
        mean = (
            sum(r.duration for r in successes) / len(successes) if successes else None
        )
        summaries.append(
            ScenarioSummary(
                scenario_tag=tag,
                attempts=len(rows),
                successes=len(successes),
                success_rate=100.0 * len(successes) / len(rows),
                mean_duration=mean,
            )
        )
    return summaries


class MissionHandle:
    """Thread-safe view of one mission: frames for streaming plus status."""

    def __init__(
        self,
        mission_id: str,
        plan: MovementPlan,
        scenario_tag: str,
        outcome_id: str,
        grounding_latency: float = 0.0,
    ):
        self.mission_id = mission_id
        self.plan = plan
        self.scenario_tag = scenario_tag
        self.outcome_id = outcome_id
        self.grounding_latency = grounding_latency
        self.record: MissionRecord | None = None
        self._status = MissionStatus()
        self._frames: list[tuple[str, dict[str, Any]]] = []
        self._cond = threading.Condition()
        self._abort = threading.Event()

    # frame producers (worker thread)

    def push_event(self, event: SimEvent) -> None:
        with self._cond:
            self._frames.append(("sim", event.to_json()))
            self._cond.notify_all()

    def push_status(self, status: MissionStatus) -> None:
        with self._cond:
            snapshot = status.to_json()
            snapshot["mission_id"] = self.mission_id
            self._frames.append(("status", snapshot))
            self._status = MissionStatus(
                phase=status.phase,
                action_index=status.action_index,
                started_at=status.started_at,
                finished_at=status.finished_at,
                current_pose=dict(status.current_pose) if status.current_pose else None,
            )
            self._cond.notify_all()

    # consumers (any thread)

    @property
    def status(self) -> MissionStatus:
        with self._cond:
            return self._status

    def phase(self) -> str:
        return self.status.phase

    def is_terminal(self) -> bool:
        return self.phase() in TERMINAL_PHASES

    def request_abort(self) -> None:
        self._abort.set()

    def abort_requested(self) -> bool:
        return self._abort.is_set()

    def frames_since(self, index: int, timeout: float | None = None) -> list[tuple[str, dict[str, Any]]]:
        """Frames from ``index`` on; blocks up to ``timeout`` if none yet."""
        with self._cond:
            if len(self._frames) <= index and timeout:
                self._cond.wait(timeout)
            return self._frames[index:]

    def wait_terminal(self, timeout: float | None = None) -> bool:
        with self._cond:
            return self._cond.wait_for(
                lambda: self._status.phase in TERMINAL_PHASES, timeout
            )


class MissionWorker:
    """Long-lived executor: consumes submitted missions one at a time."""

    def __init__(self, sim: NavSimulator, *, policy: str = "abort_mission"):
        self._sim = sim
        self._policy = policy
        self._queue: Queue[MissionHandle | None] = Queue()
        self._lock = threading.Lock()
        self._missions: dict[str, MissionHandle] = {}
        self._active: MissionHandle | None = None
        self._records: list[MissionRecord] = []
        self._on_record: Callable[[MissionRecord], None] | None = None
        self._thread = threading.Thread(target=self._loop, name="mission-worker", daemon=True)
        self._thread.start()

    def set_record_sink(self, sink: Callable[[MissionRecord], None]) -> None:
        self._on_record = sink

    def submit(
        self,
        plan: MovementPlan,
        *,
        mission_id: str,
        scenario_tag: str = "untagged",
        outcome_id: str = "",
        grounding_latency: float = 0.0,
    ) -> MissionHandle:
        with self._lock:
            if self._active is not None and not self._active.is_terminal():
                raise SimulatorBusy("a mission is already executing")
            handle = MissionHandle(mission_id, plan, scenario_tag, outcome_id, grounding_latency)
            self._missions[mission_id] = handle
            self._active = handle
        self._queue.put(handle)
        return handle

    def abort(self, mission_id: str, *, wait_s: float = 5.0) -> str:
        """Request an abort; returns the (possibly already terminal) phase."""
        handle = self.get(mission_id)
        if handle.is_terminal():
            return handle.phase()
        handle.request_abort()
        handle.wait_terminal(wait_s)
        return handle.phase()

    def get(self, mission_id: str) -> MissionHandle:
        with self._lock:
            return self._missions[mission_id]

    def missions(self) -> list[MissionHandle]:
        with self._lock:
            return list(self._missions.values())

    def records(self) -> list[MissionRecord]:
        with self._lock:
            return list(self._records)

    def shutdown(self) -> None:
        self._queue.put(None)
        self._thread.join(timeout=5)

    def _loop(self) -> None:
        while True:
            handle = self._queue.get()
            if handle is None:
                return
            record = run_mission(
                handle.plan,
                self._sim,
                policy=self._policy,
                scenario_tag=handle.scenario_tag,
                mission_id=handle.mission_id,
                outcome_id=handle.outcome_id,
                grounding_latency=handle.grounding_latency,
                on_event=handle.push_event,
                on_status=handle.push_status,
                should_abort=handle.abort_requested,
            )
            handle.record = record
            with self._lock:
                self._records.append(record)
            if self._on_record is not None:
                self._on_record(record)
