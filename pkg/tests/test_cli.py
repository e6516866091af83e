from __future__ import annotations

import json

import pytest

from quadplan.cli import main
from quadplan.config import packaged_data_path

from .corpus import GOLDEN_MISSIONS

SINGLE_ROOM_CMD, SINGLE_ROOM_WAYPOINTS = GOLDEN_MISSIONS[0]


def test_ground_mock_prints_the_single_room_json(capsys):
    code = main(["ground", "--mock", SINGLE_ROOM_CMD])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    waypoints = [a["parameters"]["waypoint"] for a in doc["response"]["actions"]]
    assert waypoints == SINGLE_ROOM_WAYPOINTS


def test_ground_rejection_is_machine_readable(capsys):
    code = main(["ground", "--mock", "xyzzy"])
    assert code == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    err = json.loads(captured.err)
    assert err["error_kind"] == "plan_rejected"
    assert "empty_plan" in err["detail"]


def test_map_check_ok(capsys):
    code = main(["map-check", str(packaged_data_path("tower2_floor9.json"))])
    assert code == 0
    assert "14 waypoints" in capsys.readouterr().out


def test_map_check_rejects_bad_fixture(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{}", encoding="utf-8")
    code = main(["map-check", str(bad)])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error_kind"] == "map_invalid"


def test_replay_packaged_suite(tmp_path, capsys):
    code = main(["replay", "paper_replica", "--out", str(tmp_path / "out")])
    assert code == 0
    out = capsys.readouterr().out
    assert "single_room_short" in out
    assert (tmp_path / "out" / "summary.csv").exists()


def test_replay_unknown_suite(capsys):
    code = main(["replay", "no_such_suite"])
    assert code == 1
    assert json.loads(capsys.readouterr().err)["error_kind"] == "suite_not_found"


def test_cli_misuse_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2


def test_ground_against_running_gateway(capsys, monkeypatch):
    # thin-client mode: route the CLI's POST into an in-process gateway
    import httpx
    from fastapi.testclient import TestClient

    from quadplan.config import ServiceConfig
    from quadplan.service import create_app

    gateway = TestClient(create_app(ServiceConfig()))

    def fake_post(url, **kwargs):
        kwargs.pop("timeout", None)
        return gateway.post(url.replace("http://gw", ""), **kwargs)

    monkeypatch.setattr(httpx, "post", fake_post)
    code = main(["ground", "--url", "http://gw", SINGLE_ROOM_CMD])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    waypoints = [a["parameters"]["waypoint"] for a in doc["response"]["actions"]]
    assert waypoints == SINGLE_ROOM_WAYPOINTS
