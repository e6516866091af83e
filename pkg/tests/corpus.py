"""Golden conformance corpus: commands with their expected action sequences,
plus authored valid/invalid plan documents for the rejection tests."""

from __future__ import annotations

import json

# (command, expected goto waypoints in order)
GOLDEN_MISSIONS = [
    (
        "Saya ingin mengambil barang di lemari lab, kemudian ingin menyoldernya.",
        ["depan_lemari", "depan_meja_solder"],
    ),
    (
        "Saya ingin mengambil barang di lemari lab, kemudian juga mengambil barang "
        "di meja solder. Setelah itu saya ingin pergi ke lab TW903",
        ["depan_lemari", "depan_meja_solder", "depan_pintu_lab_903_luar"],
    ),
    (
        "Ada acara halal bi halal di lantai 10. Namun sebelum itu, saya perlu "
        "mengambil sendok yang ada di lemari lab, kue di dalam pantry dan piring "
        "yang ada di lemari pantry. Saya ingin turun dengan lift terdekat dari pantry",
        ["depan_lemari", "ruang_pantry", "lemari_pantry", "lift_jauh"],
    ),
]


def wrapped_goto_json(waypoints: list[str]) -> str:
    return json.dumps(
        {
            "response": {
                "actions": [
                    {"command": "goto", "parameters": {"waypoint": w}} for w in waypoints
                ]
            }
        }
    )


def bare_json(actions: list[dict]) -> str:
    return json.dumps({"actions": actions})


# Valid plans beyond the golden listings (all against the tower2 fixture).
AUTHORED_VALID_PLANS = [
    wrapped_goto_json(["posisi_awal_robot"]),
    wrapped_goto_json(["meja_perakitan", "depan_lemari"]),
    wrapped_goto_json(["lift_dekat", "lift_jauh"]),
    wrapped_goto_json(["depan_toilet_pria", "depan_toilet_wanita"]),
    wrapped_goto_json(["ruang_keamanan"]),
    bare_json([{"command": "goto", "parameters": {"waypoint": "depan_lemari"}}]),
    bare_json([{"command": "wait", "parameters": {"duration": 2.0}}]),
    bare_json([{"command": "wait", "parameters": {"duration": 0}}]),
    bare_json([{"command": "explore", "parameters": {"zone": "pantry"}}]),
    bare_json([{"command": "explore", "parameters": {"zone": "lab_901"}}]),
    bare_json(
        [
            {"command": "goto", "parameters": {"waypoint": "depan_meja_solder"}},
            {"command": "wait", "parameters": {"duration": 1.5}},
            {"command": "goto", "parameters": {"waypoint": "Depan Lemari"}},
        ]
    ),
    bare_json([{"command": "halt", "parameters": {}}]),
]

# (document, expected defect kind) covering hallucinated waypoints, unknown
# commands, malformed JSON, schema violations and empty plans.
MUTATED_PLANS = [
    (wrapped_goto_json(["atlantis"]), "unknown_waypoint"),
    (wrapped_goto_json(["depan_lemari_lab"]), "unknown_waypoint"),
    (wrapped_goto_json(["ruang_pantri"]), "unknown_waypoint"),
    (wrapped_goto_json(["lift_sangat_jauh"]), "unknown_waypoint"),
    (wrapped_goto_json(["lab_901"]), "unknown_waypoint"),  # zone name used as waypoint
    (wrapped_goto_json(["depan_lemari", "gudang_bawah"]), "unknown_waypoint"),
    (wrapped_goto_json(["posisi_awal_robot2"]), "unknown_waypoint"),
    (bare_json([{"command": "explore", "parameters": {"zone": "lantai_10"}}]), "unknown_zone"),
    (bare_json([{"command": "explore", "parameters": {"zone": "depan_lemari"}}]), "unknown_zone"),
    (bare_json([{"command": "fly", "parameters": {}}]), "unknown_command"),
    (bare_json([{"command": "dance", "parameters": {}}]), "unknown_command"),
    (bare_json([{"command": "", "parameters": {}}]), "unknown_command"),
    (bare_json([{"parameters": {"waypoint": "depan_lemari"}}]), "unknown_command"),
    (bare_json(["goto depan_lemari"]), "unknown_command"),
    (bare_json([{"command": "goto", "parameters": {}}]), "bad_parameter"),
    (bare_json([{"command": "goto", "parameters": {"waypoint": "  "}}]), "bad_parameter"),
    (bare_json([{"command": "goto", "parameters": {"waypoint": 7}}]), "bad_parameter"),
    (bare_json([{"command": "wait", "parameters": {"duration": -1}}]), "bad_parameter"),
    (bare_json([{"command": "wait", "parameters": {"duration": "soon"}}]), "bad_parameter"),
    (bare_json([{"command": "wait", "parameters": {}}]), "bad_parameter"),
    (bare_json([{"command": "explore", "parameters": {}}]), "bad_parameter"),
    (bare_json([{"command": "goto", "parameters": "depan_lemari"}]), "bad_parameter"),
    ("this is not json at all", "malformed_json"),
    ('{"response": {"actions": [', "malformed_json"),
    ("", "malformed_json"),
    ('{"response": {}}', "missing_actions_array"),
    ('{"plan": []}', "missing_actions_array"),
    ('["goto", "wait"]', "missing_actions_array"),
    ('{"actions": []}', "empty_plan"),
    ('{"response": {"actions": []}}', "empty_plan"),
]
