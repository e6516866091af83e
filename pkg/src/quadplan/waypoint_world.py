"""Semantic floor map: named waypoints, zones and an occupancy grid.

The map is authored as a single JSON fixture (see docs/formats.md) and is
fully validated at load time, so that navigation can never fail at runtime
because of a bad map: every waypoint must sit on a free cell and be
reachable from the robot home position.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .plan_schema import canonicalize_name

__all__ = [
    "OccupancyGrid",
    "Waypoint",
    "WaypointWorld",
    "WorldFormatError",
    "Zone",
    "levenshtein",
    "load_world",
    "world_from_json",
]


class WorldFormatError(ValueError):
    """The map file is missing, malformed, or violates an invariant."""


def levenshtein(a: str, b: str) -> int:
    """Plain edit distance, used for did-you-mean suggestions."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,  # deletion
                    current[j - 1] + 1,  # insertion
                    previous[j - 1] + (ca != cb),  # substitution
                )
            )
        previous = current
    return previous[-1]


def nearest_name(name: str, candidates: Iterable[str]) -> str | None:
    """Closest candidate by edit distance; ties break lexicographically."""
    best: str | None = None
    best_distance = -1
    for candidate in sorted(candidates):
        distance = levenshtein(name, candidate)
        if best is None or distance < best_distance:
            best, best_distance = candidate, distance
    return best


@dataclass(frozen=True, slots=True)
class Waypoint:
    name: str
    display_name: str
    x: float
    y: float
    z: float
    yaw: float
    zone: str


@dataclass(frozen=True, slots=True)
class Zone:
    name: str
    members: frozenset[str]


@dataclass(frozen=True)
class OccupancyGrid:
    """Row-major boolean grid; True means occupied.

    Cell (ix, iy) covers [origin + i*resolution, origin + (i+1)*resolution).
    """

    resolution: float
    width: int
    height: int
    origin_x: float
    origin_y: float
    cells: bytes  # len == width * height, 0 free / 1 occupied

    def index(self, ix: int, iy: int) -> int:
        return iy * self.width + ix

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (
            int((x - self.origin_x) / self.resolution),
            int((y - self.origin_y) / self.resolution),
        )

    def center_of(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin_x + (ix + 0.5) * self.resolution,
            self.origin_y + (iy + 0.5) * self.resolution,
        )

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def is_free(self, ix: int, iy: int) -> bool:
        return self.in_bounds(ix, iy) and self.cells[iy * self.width + ix] == 0

    def is_free_point(self, x: float, y: float) -> bool:
        ix, iy = self.cell_of(x, y)
        return self.is_free(ix, iy)


@dataclass
class WaypointWorld:
    name: str
    waypoints: dict[str, Waypoint]
    zones: dict[str, Zone]
    grid: OccupancyGrid
    home: str
    source_document: dict[str, Any] = field(repr=False, default_factory=dict)
    # Memoized shortest paths between cells on the unmodified grid; keyed by
    # (start_index, goal_index). Shared freely: the world is immutable.
    _path_cache: dict = field(default_factory=dict, repr=False)

    def lookup(self, name: str) -> Waypoint:
        """Canonicalize then exact-match; raises KeyError with a suggestion."""
        canonical = canonicalize_name(name)
        try:
            return self.waypoints[canonical]
        except KeyError:
            suggestion = self.nearest_waypoint_name(canonical)
            raise KeyError(
                f"unknown waypoint {canonical!r}, closest match: {suggestion!r}"
            ) from None

    def nearest_waypoint_name(self, name: str) -> str | None:
        return nearest_name(name, self.waypoints)

    def nearest_zone_name(self, name: str) -> str | None:
        return nearest_name(name, self.zones)

    def vocabulary(self) -> list[tuple[str, str, str]]:
        """(name, display_name, zone) rows, sorted by name for reproducibility."""
        return [
            (w.name, w.display_name, w.zone)
            for w in sorted(self.waypoints.values(), key=lambda w: w.name)
        ]

    def home_waypoint(self) -> Waypoint:
        return self.waypoints[self.home]

    def canonical_document(self) -> str:
        """The loaded fixture re-serialized in a stable form (for GET /map)."""
        return json.dumps(
            self.source_document, separators=(",", ":"), ensure_ascii=False, sort_keys=True
        )


def _expand_runs(rows: list[Any], width: int, height: int) -> bytes:
    """Rows are run-length encoded as alternating free/occupied counts,
    always starting with the free count (which may be 0)."""
    cells = bytearray()
    if len(rows) != height:
        raise WorldFormatError(f"grid has {len(rows)} rows, expected {height}")
    for iy, runs in enumerate(rows):
        if not isinstance(runs, list) or not all(
            isinstance(n, int) and n >= 0 for n in runs
        ):
            raise WorldFormatError(f"grid row {iy} is not a list of non-negative ints")
        value = 0
        row_len = 0
        for run in runs:
            cells.extend(bytes([value]) * run)
            row_len += run
            value ^= 1
        if row_len != width:
            raise WorldFormatError(f"grid row {iy} sums to {row_len}, expected {width}")
    return bytes(cells)


def _reachable_from(grid: OccupancyGrid, start: tuple[int, int]) -> set[int]:
    """Flood fill with the planner's movement rules (8-connected, no corner
    cutting), so load-time reachability matches what plan_path can do."""
    width = grid.width
    start_idx = grid.index(*start)
    seen = {start_idx}
    queue = deque([start])
    while queue:
        ix, iy = queue.popleft()
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx, ny = ix + dx, iy + dy
                if not grid.is_free(nx, ny):
                    continue
                if dx != 0 and dy != 0:
                    if not (grid.is_free(ix + dx, iy) and grid.is_free(ix, iy + dy)):
                        continue
                idx = ny * width + nx
                if idx not in seen:
                    seen.add(idx)
                    queue.append((nx, ny))
    return seen


def world_from_json(doc: dict[str, Any], *, name_hint: str = "<memory>") -> WaypointWorld:
    """Build and fully validate a world from a parsed fixture document."""
    if not isinstance(doc, dict):
        raise WorldFormatError(f"{name_hint}: map document must be a JSON object")
    try:
        resolution = float(doc["resolution"])
        width = int(doc["width"])
        height = int(doc["height"])
        origin = doc.get("origin", [0.0, 0.0])
        rows = doc["grid_rows"]
        waypoint_docs = doc["waypoints"]
        zone_docs = doc["zones"]
        home = canonicalize_name(str(doc["home"]))
        world_name = str(doc.get("name", name_hint))
    except KeyError as exc:
        raise WorldFormatError(f"{name_hint}: missing required key {exc}") from None
    if resolution <= 0:
        raise WorldFormatError("resolution must be > 0")
    if width <= 0 or height <= 0:
        raise WorldFormatError("grid dimensions must be positive")
    cells = _expand_runs(rows, width, height)
    grid = OccupancyGrid(
        resolution=resolution,
        width=width,
        height=height,
        origin_x=float(origin[0]),
        origin_y=float(origin[1]),
        cells=cells,
    )

    waypoints: dict[str, Waypoint] = {}
    for entry in waypoint_docs:
        wp_name = canonicalize_name(str(entry["name"]))
        if wp_name in waypoints:
            raise WorldFormatError(f"duplicate waypoint name {wp_name!r}")
        pose = entry["pose"]
        waypoint = Waypoint(
            name=wp_name,
            display_name=str(entry.get("display_name", wp_name)),
            x=float(pose["x"]),
            y=float(pose["y"]),
            z=float(pose.get("z", 0.0)),
            yaw=float(pose.get("yaw", 0.0)),
            zone=canonicalize_name(str(entry["zone"])),
        )
        for coord in (waypoint.x, waypoint.y, waypoint.z, waypoint.yaw):
            if coord != coord or coord in (float("inf"), float("-inf")):
                raise WorldFormatError(f"waypoint {wp_name!r} has a non-finite pose")
        if not grid.is_free_point(waypoint.x, waypoint.y):
            raise WorldFormatError(
                f"waypoint {wp_name!r} at ({waypoint.x}, {waypoint.y}) "
                "is outside the grid or on an occupied cell"
            )
        waypoints[wp_name] = waypoint
    if not waypoints:
        raise WorldFormatError("world has no waypoints")

    zones: dict[str, Zone] = {}
    for entry in zone_docs:
        zone_name = canonicalize_name(str(entry["name"]))
        if zone_name in zones:
            raise WorldFormatError(f"duplicate zone name {zone_name!r}")
        members = frozenset(canonicalize_name(str(m)) for m in entry["members"])
        for member in members:
            if member not in waypoints:
                raise WorldFormatError(
                    f"zone {zone_name!r} references unknown waypoint {member!r}"
                )
        zones[zone_name] = Zone(zone_name, members)
    for waypoint in waypoints.values():
        zone = zones.get(waypoint.zone)
        if zone is None:
            raise WorldFormatError(
                f"waypoint {waypoint.name!r} references unknown zone {waypoint.zone!r}"
            )
        if waypoint.name not in zone.members:
            raise WorldFormatError(
                f"waypoint {waypoint.name!r} is not listed in its zone {waypoint.zone!r}"
            )

    if home not in waypoints:
        raise WorldFormatError(f"home waypoint {home!r} does not exist")

    home_cell = grid.cell_of(waypoints[home].x, waypoints[home].y)
    reachable = _reachable_from(grid, home_cell)
    for waypoint in waypoints.values():
        idx = grid.index(*grid.cell_of(waypoint.x, waypoint.y))
        if idx not in reachable:
            raise WorldFormatError(
                f"waypoint {waypoint.name!r} is not reachable from home"
            )

    return WaypointWorld(
        name=world_name,
        waypoints=waypoints,
        zones=zones,
        grid=grid,
        home=home,
        source_document=doc,
    )


def load_world(path: str | Path) -> WaypointWorld:
    """Load and validate a map fixture file."""
    path = Path(path)
    if not path.exists():
        raise WorldFormatError(f"map file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise WorldFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return world_from_json(doc, name_hint=path.stem)
