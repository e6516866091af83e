#!/usr/bin/env python3
"""Author the tower2_floor9 map fixture.

The floor is a desk-scale 40 m x 20 m layout at 0.1 m grid resolution:
a central east-west corridor, the robotics lab (room 901) in the
south-west, the pantry area in the south-east, and door/entrance
waypoints for the remaining rooms placed in the corridor. Only relative
distances matter; they are laid out so the four benchmark scenario
categories produce strictly increasing travel times.

Run from the repository root:

    python3 tools/build_floor_fixture.py
"""

from __future__ import annotations

import json
from pathlib import Path

RESOLUTION = 0.1
WIDTH_M = 40.0
HEIGHT_M = 20.0
WIDTH = int(WIDTH_M / RESOLUTION)
HEIGHT = int(HEIGHT_M / RESOLUTION)

# Free regions carved out of an otherwise occupied floor: (x0, y0, x1, y1).
FREE_RECTS = [
    # main corridor
    (1.0, 8.5, 39.0, 12.5),
    # room 901 (robotics lab) and its door gap onto the corridor
    (1.0, 1.0, 15.0, 8.0),
    (11.5, 8.0, 12.5, 8.5),
    # pantry area and its door gap
    (30.0, 1.0, 39.0, 8.0),
    (33.5, 8.0, 34.5, 8.5),
]

WAYPOINTS = [
    # name, display_name, x, y, yaw, zone
    ("posisi_awal_robot", "Robot Home Pos.", 2.0, 2.0, 0.0, "lab_901"),
    ("meja_perakitan", "Assembly Table", 5.0, 2.0, 0.0, "lab_901"),
    ("depan_lemari", "Lab Shelf", 9.0, 2.0, 1.57, "lab_901"),
    ("depan_meja_solder", "Soldering Table", 13.5, 6.0, 0.0, "lab_901"),
    ("depan_pintu_lab_903_luar", "Room 903 Door", 17.5, 12.0, 1.57, "lab_903"),
    ("depan_pintu_lab_902", "Room 902 Door", 24.0, 12.0, 1.57, "lab_902"),
    ("depan_pintu_lab_904", "Room 904 Door", 31.0, 12.0, 1.57, "lab_904"),
    ("depan_toilet_pria", "Men's Restroom Entrance", 6.0, 12.0, 1.57, "toilet_pria"),
    ("depan_toilet_wanita", "Women's Restroom Entrance", 9.0, 12.0, 1.57, "toilet_wanita"),
    ("lift_dekat", "Elevator Door (near side)", 2.0, 10.5, 3.14, "area_lift_dekat"),
    ("lift_jauh", "Elevator Door (far side)", 38.0, 10.5, 0.0, "area_lift_jauh"),
    ("ruang_pantry", "Pantry Kitchen", 32.0, 5.0, 0.0, "pantry"),
    ("lemari_pantry", "Pantry Shelf", 37.5, 2.0, 0.0, "pantry"),
    ("ruang_keamanan", "Security Room", 30.8, 7.0, 3.14, "pantry"),
]

HOME = "posisi_awal_robot"


def build_cells() -> list[list[bool]]:
    occupied = [[True] * WIDTH for _ in range(HEIGHT)]
    for x0, y0, x1, y1 in FREE_RECTS:
        for iy in range(HEIGHT):
            cy = (iy + 0.5) * RESOLUTION
            if not (y0 <= cy < y1):
                continue
            row = occupied[iy]
            for ix in range(WIDTH):
                cx = (ix + 0.5) * RESOLUTION
                if x0 <= cx < x1:
                    row[ix] = False
    return occupied


def encode_rows(occupied: list[list[bool]]) -> list[list[int]]:
    """Run-length encode each row, alternating free/occupied, free first."""
    rows = []
    for row in occupied:
        runs: list[int] = []
        value = False  # free
        count = 0
        for cell in row:
            if cell == value:
                count += 1
            else:
                runs.append(count)
                value = cell
                count = 1
        runs.append(count)
        rows.append(runs)
    return rows


def main() -> None:
    occupied = build_cells()
    free_count = sum(not cell for row in occupied for cell in row)

    zones: dict[str, list[str]] = {}
    for name, _, _, _, _, zone in WAYPOINTS:
        zones.setdefault(zone, []).append(name)

    doc = {
        "name": "tower2_floor9",
        "notes": (
            "Authored desk-scale layout of the 9th floor: relative distances, "
            "not absolute ones, are meaningful. Elevator IDs: lift_dekat is the "
            "west lobby near the 901 lab, lift_jauh the east lobby near the pantry."
        ),
        "resolution": RESOLUTION,
        "origin": [0.0, 0.0],
        "width": WIDTH,
        "height": HEIGHT,
        "home": HOME,
        "waypoints": [
            {
                "name": name,
                "display_name": display,
                "pose": {"x": x, "y": y, "z": 0.0, "yaw": yaw},
                "zone": zone,
            }
            for name, display, x, y, yaw, zone in WAYPOINTS
        ],
        "zones": [
            {"name": zone, "members": sorted(members)}
            for zone, members in sorted(zones.items())
        ],
        "grid_rows": encode_rows(occupied),
    }

    out = Path(__file__).resolve().parents[1] / "src" / "quadplan" / "data" / "tower2_floor9.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    print(f"grid {WIDTH}x{HEIGHT}, {free_count} free cells")
    print(f"{len(WAYPOINTS)} waypoints, {len(zones)} zones")


if __name__ == "__main__":
    main()
