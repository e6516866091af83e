"""Deterministic navigation simulator: grid path planning and kinematics.

Paths are planned with A* on the 8-connected occupancy grid (unit
orthogonal steps, sqrt(2) diagonals, octile heuristic, no corner
cutting) and followed at a constant cruise speed in fixed 0.1 s ticks.
Everything is driven by explicit seeds and an integer microsecond clock,
so identical inputs always produce byte-identical event streams.
"""

from __future__ import annotations

import math
import random
import time as _time
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Any, Callable, Iterable

from .plan_schema import ActionCommand
from .waypoint_world import OccupancyGrid, Waypoint, WaypointWorld

__all__ = [
    "ArrivalFault",
    "BlockCellsFault",
    "NavSimulator",
    "PlannedPath",
    "RobotState",
    "SimEvent",
    "fault_from_json",
    "plan_path",
]

TICK_US = 100_000  # 0.1 s simulation tick
SQRT2 = math.sqrt(2.0)

DEFAULT_CRUISE_SPEED = 0.8  # m/s


@dataclass(slots=True)
class RobotState:
    x: float
    y: float
    heading: float
    speed: float
    time_us: int = 0

    @property
    def sim_time(self) -> float:
        return self.time_us / 1e6


@dataclass(frozen=True, slots=True)
class PlannedPath:
    cells: tuple[tuple[int, int], ...]
    length: float  # meters
    goal_waypoint: str


@dataclass(frozen=True, slots=True)
class SimEvent:
    kind: str  # path_planned | pose_update | waypoint_reached | wait_started
    # | wait_finished | explore_visited | halted | plan_failed
    sim_time: float
    payload: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "sim_time": self.sim_time, "payload": self.payload}


@dataclass(frozen=True, slots=True)
class ArrivalFault:
    """Fail a goto arrival with the given probability (seeded simulator RNG)."""

    probability: float


@dataclass(frozen=True, slots=True)
class BlockCellsFault:
    """Occupy all cells within radius_m of a waypoint once sim time passes
    at_time_s; models a doorway or corridor becoming blocked mid-mission."""

    waypoint: str
    radius_m: float
    at_time_s: float


FaultSpec = ArrivalFault | BlockCellsFault


def fault_from_json(doc: dict[str, Any], world: WaypointWorld) -> FaultSpec:
    kind = doc.get("kind")
    if kind == "arrival_failure":
        probability = float(doc["probability"])
        if not 0.0 <= probability <= 1.0:
            raise ValueError(f"arrival_failure probability out of range: {probability}")
        return ArrivalFault(probability)
    if kind == "block_cells":
        waypoint = world.lookup(str(doc["waypoint"])).name  # raises on unknown name
        return BlockCellsFault(
            waypoint=waypoint,
            radius_m=float(doc.get("radius_m", 0.5)),
            at_time_s=float(doc.get("at_time_s", 0.0)),
        )
    raise ValueError(f"unknown fault kind {kind!r}")


def _octile(dx: int, dy: int) -> float:
    if dx < dy:
        dx, dy = dy, dx
    return dx + (SQRT2 - 1.0) * dy


def _astar(
    grid: OccupancyGrid,
    start: tuple[int, int],
    goal: tuple[int, int],
    blocked: frozenset[int],
) -> tuple[list[tuple[int, int]], float] | None:
    """Cells from start to goal and the path cost in steps, or None.

    Deterministic: ties break on smaller heuristic, then row-major index.
    The start cell is always treated as traversable (the robot is on it).
    """
    width = grid.width
    cells = grid.cells
    n = width * grid.height
    start_idx = start[1] * width + start[0]
    goal_idx = goal[1] * width + goal[0]
    if start_idx == goal_idx:
        return [start], 0.0
    if cells[goal_idx] or goal_idx in blocked:
        return None

    gx, gy = goal
    g_score = [math.inf] * n
    parent = [-1] * n
    g_score[start_idx] = 0.0
    open_heap: list[tuple[float, float, int]] = [
        (_octile(abs(start[0] - gx), abs(start[1] - gy)), 0.0, start_idx)
    ]
    closed = bytearray(n)

    while open_heap:
        _, _, current = heappop(open_heap)
        if current == goal_idx:
            path = [current]
            while path[-1] != start_idx:
                path.append(parent[path[-1]])
            path.reverse()
            return [(idx % width, idx // width) for idx in path], g_score[goal_idx]
        if closed[current]:
            continue
        closed[current] = 1
        cx = current % width
        cy = current // width
        g_here = g_score[current]

        for dx, dy, step in (
            (1, 0, 1.0),
            (-1, 0, 1.0),
            (0, 1, 1.0),
            (0, -1, 1.0),
            (1, 1, SQRT2),
            (1, -1, SQRT2),
            (-1, 1, SQRT2),
            (-1, -1, SQRT2),
        ):
            nx = cx + dx
            ny = cy + dy
            if not (0 <= nx < width and 0 <= ny < grid.height):
                continue
            nidx = ny * width + nx
            if cells[nidx] or nidx in blocked:
                continue
            if step > 1.0:
                # no corner cutting: both orthogonal neighbours must be free
                side_a = cy * width + nx
                side_b = ny * width + cx
                if cells[side_a] or side_a in blocked or cells[side_b] or side_b in blocked:
                    continue
            tentative = g_here + step
            if tentative < g_score[nidx]:
                g_score[nidx] = tentative
                parent[nidx] = current
                h = _octile(abs(nx - gx), abs(ny - gy))
                heappush(open_heap, (tentative + h, h, nidx))
    return None


def plan_path(
    world: WaypointWorld,
    start: tuple[float, float],
    goal: Waypoint,
    blocked: frozenset[int] = frozenset(),
) -> PlannedPath | None:
    """Optimal grid path from a world position to a waypoint, or None.

    Unblocked queries are memoized on the world (it is immutable).
    """
    grid = world.grid
    start_cell = grid.cell_of(*start)
    if not grid.is_free(*start_cell):
        return None
    goal_cell = grid.cell_of(goal.x, goal.y)
    cache_key = None
    if not blocked:
        cache_key = (grid.index(*start_cell), grid.index(*goal_cell), goal.name)
        cached = world._path_cache.get(cache_key)
        if cached is not None:
            return cached
    # never treat the cell the robot stands on as blocked
    effective = blocked - {grid.index(*start_cell)} if blocked else blocked
    result = _astar(grid, start_cell, goal_cell, effective)
    if result is None:
        return None
    cells, cost = result
    path = PlannedPath(
        cells=tuple(cells), length=cost * grid.resolution, goal_waypoint=goal.name
    )
    if cache_key is not None:
        world._path_cache[cache_key] = path
    return path


def _polyline(grid: OccupancyGrid, cells: tuple[tuple[int, int], ...]) -> list[tuple[float, float]]:
    return [grid.center_of(ix, iy) for ix, iy in cells]


class NavSimulator:
    """One robot on one world; executes validated actions sequentially.

    Events are delivered through the ``emit`` callback as they happen so a
    live gateway can fan them out; ``should_abort`` is polled every tick.
    """

    def __init__(
        self,
        world: WaypointWorld,
        *,
        cruise_speed: float = DEFAULT_CRUISE_SPEED,
        seed: int | None = None,
        realtime: bool = False,
        faults: Iterable[FaultSpec] = (),
    ) -> None:
        if cruise_speed <= 0:
            raise ValueError("cruise speed must be positive")
        self.world = world
        home = world.home_waypoint()
        hx, hy = world.grid.center_of(*world.grid.cell_of(home.x, home.y))
        self.state = RobotState(x=hx, y=hy, heading=home.yaw, speed=cruise_speed)
        self.realtime = realtime
        self._rng = random.Random(seed)
        self._arrival_faults: list[ArrivalFault] = []
        self._pending_blocks: list[tuple[int, frozenset[int]]] = []  # (at_time_us, cells)
        self._blocked: frozenset[int] = frozenset()
        for fault in faults:
            self.inject_fault(fault)

    # -- faults ---------------------------------------------------------

    def inject_fault(self, fault: FaultSpec) -> None:
        if isinstance(fault, ArrivalFault):
            self._arrival_faults.append(fault)
            return
        waypoint = self.world.lookup(fault.waypoint)  # raises on unknown name
        grid = self.world.grid
        wx, wy = waypoint.x, waypoint.y
        radius_cells = int(math.ceil(fault.radius_m / grid.resolution))
        cx, cy = grid.cell_of(wx, wy)
        cells = set()
        for iy in range(cy - radius_cells, cy + radius_cells + 1):
            for ix in range(cx - radius_cells, cx + radius_cells + 1):
                if not grid.in_bounds(ix, iy):
                    continue
                px, py = grid.center_of(ix, iy)
                if math.hypot(px - wx, py - wy) <= fault.radius_m:
                    cells.add(grid.index(ix, iy))
        at_us = int(round(fault.at_time_s * 1e6))
        self._pending_blocks.append((at_us, frozenset(cells)))
        self._pending_blocks.sort(key=lambda item: item[0])
        self._activate_blocks()

    def _activate_blocks(self) -> bool:
        """Move due pending blocks into the active set; True if changed."""
        changed = False
        while self._pending_blocks and self._pending_blocks[0][0] <= self.state.time_us:
            _, cells = self._pending_blocks.pop(0)
            self._blocked = self._blocked | cells
            changed = True
        return changed

    # -- execution ------------------------------------------------------

    def execute(
        self,
        action: ActionCommand,
        *,
        emit: Callable[[SimEvent], None],
        should_abort: Callable[[], bool] | None = None,
    ) -> str:
        """Run one action; returns completed | plan_failed | halted | aborted."""
        should_abort = should_abort or (lambda: False)
        if action.command == "goto":
            waypoint = self.world.waypoints[action.waypoint]
            return self._goto(waypoint, emit, should_abort)
        if action.command == "wait":
            return self._wait(action.duration, emit, should_abort)
        if action.command == "explore":
            zone = self.world.zones[action.zone]
            for member in sorted(zone.members):
                outcome = self._goto(self.world.waypoints[member], emit, should_abort)
                if outcome != "completed":
                    return outcome
                self._emit(emit, "explore_visited", {"zone": zone.name, "waypoint": member})
            return "completed"
        # halt
        self._emit(
            emit, "halted", {"x": self.state.x, "y": self.state.y}
        )
        return "halted"

    def _emit(self, emit: Callable[[SimEvent], None], kind: str, payload: dict[str, Any]) -> None:
        emit(SimEvent(kind=kind, sim_time=self.state.time_us / 1e6, payload=payload))

    def _tick(self) -> None:
        self.state.time_us += TICK_US
        if self.realtime:
            _time.sleep(TICK_US / 1e6)

    def _wait(
        self,
        duration: float,
        emit: Callable[[SimEvent], None],
        should_abort: Callable[[], bool],
    ) -> str:
        duration_us = int(round(duration * 1e6))
        self._emit(emit, "wait_started", {"duration": duration})
        end_us = self.state.time_us + duration_us
        while self.state.time_us + TICK_US <= end_us:
            self._tick()
            if should_abort():
                return "aborted"
        self.state.time_us = end_us  # exact remainder
        self._activate_blocks()
        self._emit(emit, "wait_finished", {"duration": duration})
        return "completed"

    def _plan(self, goal: Waypoint) -> PlannedPath | None:
        return plan_path(self.world, (self.state.x, self.state.y), goal, self._blocked)

    def _goto(
        self,
        goal: Waypoint,
        emit: Callable[[SimEvent], None],
        should_abort: Callable[[], bool],
    ) -> str:
        self._activate_blocks()
        path = self._plan(goal)
        if path is None:
            self._emit(
                emit, "plan_failed", {"waypoint": goal.name, "reason": "unreachable"}
            )
            return "plan_failed"
        self._emit(
            emit,
            "path_planned",
            {"waypoint": goal.name, "length": path.length, "cells": len(path.cells)},
        )
        replanned = False
        grid = self.world.grid
        points = _polyline(grid, path.cells)
        seg = 0  # index of the segment's start point
        seg_pos = 0.0  # meters already travelled along the current segment
        step = self.state.speed * (TICK_US / 1e6)

        while True:
            # arrival check: nothing left to travel
            if seg >= len(points) - 1:
                gx_wp, gy_wp = points[-1]
                self.state.x, self.state.y = gx_wp, gy_wp
                for fault in self._arrival_faults:
                    if self._rng.random() < fault.probability:
                        self._emit(
                            emit,
                            "plan_failed",
                            {"waypoint": goal.name, "reason": "arrival failure injected"},
                        )
                        return "plan_failed"
                self._emit(
                    emit,
                    "waypoint_reached",
                    {"waypoint": goal.name, "x": self.state.x, "y": self.state.y},
                )
                return "completed"

            self._tick()
            if should_abort():
                return "aborted"
            if self._activate_blocks():
                remaining = {
                    grid.index(ix, iy) for ix, iy in path.cells[seg + 1 :]
                }
                if remaining & self._blocked:
                    if replanned:
                        self._emit(
                            emit,
                            "plan_failed",
                            {"waypoint": goal.name, "reason": "path blocked after replan"},
                        )
                        return "plan_failed"
                    replanned = True
                    path = self._plan(goal)
                    if path is None:
                        self._emit(
                            emit,
                            "plan_failed",
                            {"waypoint": goal.name, "reason": "blocked, no alternative path"},
                        )
                        return "plan_failed"
                    self._emit(
                        emit,
                        "path_planned",
                        {
                            "waypoint": goal.name,
                            "length": path.length,
                            "cells": len(path.cells),
                            "replan": True,
                        },
                    )
                    points = _polyline(grid, path.cells)
                    seg = 0
                    seg_pos = 0.0

            # advance one tick's worth of travel along the polyline
            travel = step
            while travel > 0 and seg < len(points) - 1:
                x0, y0 = points[seg]
                x1, y1 = points[seg + 1]
                seg_len = math.hypot(x1 - x0, y1 - y0)
                left_in_seg = seg_len - seg_pos
                if travel >= left_in_seg:
                    travel -= left_in_seg
                    seg += 1
                    seg_pos = 0.0
                    self.state.x, self.state.y = x1, y1
                    self.state.heading = math.atan2(y1 - y0, x1 - x0)
                else:
                    seg_pos += travel
                    frac = seg_pos / seg_len
                    self.state.x = x0 + (x1 - x0) * frac
                    self.state.y = y0 + (y1 - y0) * frac
                    self.state.heading = math.atan2(y1 - y0, x1 - x0)
                    travel = 0.0
            self._emit(
                emit,
                "pose_update",
                {"x": self.state.x, "y": self.state.y, "heading": self.state.heading},
            )
