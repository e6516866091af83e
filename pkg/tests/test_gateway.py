from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from quadplan.config import ServiceConfig
from quadplan.llm_provider import ProviderConfig
from quadplan.service import create_app

from .corpus import GOLDEN_MISSIONS

SINGLE_ROOM_CMD, SINGLE_ROOM_WAYPOINTS = GOLDEN_MISSIONS[0]
CROSS_ZONE_CMD, CROSS_ZONE_WAYPOINTS = GOLDEN_MISSIONS[2]


@pytest.fixture()
def client():
    app = create_app(ServiceConfig())
    with TestClient(app) as test_client:
        yield test_client


def wait_terminal(client: TestClient, mission_id: str, timeout: float = 20.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        info = client.get(f"/v1/missions/{mission_id}").json()
        if info["phase"] in ("completed", "failed", "aborted"):
            return info
        time.sleep(0.02)
    raise AssertionError("mission did not reach a terminal phase in time")


def sse_frames(body: str) -> list[tuple[str, dict]]:
    frames = []
    for chunk in body.split("\n\n"):
        event, data = None, None
        for line in chunk.splitlines():
            if line.startswith("event: "):
                event = line[len("event: ") :]
            elif line.startswith("data: "):
                data = json.loads(line[len("data: ") :])
        if event is not None:
            frames.append((event, data))
    return frames


def test_healthz_never_touches_the_provider(client):
    body = client.get("/v1/healthz").json()
    assert body["status"] == "ok"
    assert body["provider"] == "mock"
    assert body["version"]


def test_map_endpoint_serves_the_canonical_fixture(client, world):
    response = client.get("/v1/map")
    assert response.status_code == 200
    assert response.content.decode("utf-8") == world.canonical_document()


def test_review_returns_the_plan_without_executing(client):
    response = client.post(
        "/v1/missions", json={"instruction": CROSS_ZONE_CMD, "execute": False}
    )
    assert response.status_code == 200
    body = response.json()
    assert body.get("mission_id") is None
    waypoints = [a["parameters"]["waypoint"] for a in body["plan"]["actions"]]
    assert waypoints == CROSS_ZONE_WAYPOINTS
    assert client.get("/v1/missions").json() == []  # nothing started


def test_empty_instruction_is_400(client):
    response = client.post("/v1/missions", json={"instruction": "   "})
    assert response.status_code == 400
    assert response.json()["error_kind"] == "bad_request"


def test_malformed_body_is_400(client):
    response = client.post("/v1/missions", json={"instruction": 42, "execute": "maybe"})
    assert response.status_code == 400
    assert response.json()["error_kind"] == "bad_request"
    response = client.post("/v1/missions", json={"instruction": "x", "scenario_tag": "zoo"})
    assert response.status_code == 400


def test_rejected_plan_is_422_with_defects(client):
    response = client.post("/v1/missions", json={"instruction": "xyzzy", "execute": True})
    assert response.status_code == 422
    body = response.json()
    assert body["error_kind"] == "plan_rejected"
    assert body["defects"][0]["kind"] == "empty_plan"
    assert body["outcome_id"]


def test_provider_unavailable_is_502():
    config = ServiceConfig(
        use_mock=False,
        provider=ProviderConfig(
            endpoint_url="http://127.0.0.1:9",  # discard port: connection refused
            model_name="m",
            timeout=0.2,
            max_retries=0,
        ),
    )
    with TestClient(create_app(config)) as client:
        response = client.post("/v1/missions", json={"instruction": "halo"})
        assert response.status_code == 502
        assert response.json()["error_kind"] == "provider_unavailable"


def test_execute_runs_the_mission_and_feeds_metrics(client):
    response = client.post(
        "/v1/missions",
        json={
            "instruction": SINGLE_ROOM_CMD,
            "execute": True,
            "scenario_tag": "single_room_short",
        },
    )
    assert response.status_code == 202
    mission_id = response.json()["mission_id"]
    info = wait_terminal(client, mission_id)
    assert info["phase"] == "completed"
    rows = client.get("/v1/metrics").json()
    assert rows == [
        {
            "scenario_tag": "single_room_short",
            "attempts": 1,
            "successes": 1,
            "success_rate": 100.0,
            "mean_duration_s": rows[0]["mean_duration_s"],
        }
    ]
    assert rows[0]["mean_duration_s"] > 0


def test_review_and_execute_plans_are_byte_identical(client):
    review = client.post("/v1/missions", json={"instruction": CROSS_ZONE_CMD}).json()
    execute = client.post(
        "/v1/missions", json={"instruction": CROSS_ZONE_CMD, "execute": True}
    ).json()
    canonical = lambda body: json.dumps(body["plan"]["actions"], sort_keys=True)
    assert canonical(review) == canonical(execute)
    wait_terminal(client, execute["mission_id"])


def test_unknown_mission_is_404(client):
    assert client.get("/v1/missions/nope").status_code == 404
    assert client.post("/v1/missions/nope/abort").status_code == 404
    assert client.get("/v1/missions/nope/events").status_code == 404


def test_abort_is_idempotent_on_terminal_missions(client):
    response = client.post(
        "/v1/missions", json={"instruction": SINGLE_ROOM_CMD, "execute": True}
    )
    mission_id = response.json()["mission_id"]
    wait_terminal(client, mission_id)
    body = client.post(f"/v1/missions/{mission_id}/abort").json()
    assert body["phase"] == "completed"


def test_sse_replay_is_complete_and_byte_identical(client):
    response = client.post(
        "/v1/missions", json={"instruction": CROSS_ZONE_CMD, "execute": True}
    )
    mission_id = response.json()["mission_id"]
    wait_terminal(client, mission_id)

    def fetch() -> bytes:
        with client.stream("GET", f"/v1/missions/{mission_id}/events") as stream:
            return b"".join(stream.iter_bytes())

    first = fetch()
    second = fetch()
    assert first == second  # two subscribers, identical streams

    frames = sse_frames(first.decode("utf-8"))
    reached = [
        f for kind, f in frames if kind == "sim" and f["kind"] == "waypoint_reached"
    ]
    assert len(reached) == len(CROSS_ZONE_WAYPOINTS)  # one per goto
    assert [f["payload"]["waypoint"] for f in reached] == CROSS_ZONE_WAYPOINTS
    kind, last = frames[-1]
    assert kind == "status" and last["phase"] == "completed"


def test_sse_resume_with_last_event_id_skips_replayed_frames(client):
    response = client.post(
        "/v1/missions", json={"instruction": SINGLE_ROOM_CMD, "execute": True}
    )
    mission_id = response.json()["mission_id"]
    wait_terminal(client, mission_id)
    with client.stream("GET", f"/v1/missions/{mission_id}/events") as stream:
        full = b"".join(stream.iter_bytes()).decode("utf-8")
    ids = [int(l[4:]) for l in full.splitlines() if l.startswith("id: ")]
    assert ids == list(range(1, len(ids) + 1))
    resume_from = ids[-1] - 2
    with client.stream(
        "GET",
        f"/v1/missions/{mission_id}/events",
        headers={"Last-Event-ID": str(resume_from)},
    ) as stream:
        tail = b"".join(stream.iter_bytes()).decode("utf-8")
    tail_ids = [int(l[4:]) for l in tail.splitlines() if l.startswith("id: ")]
    assert tail_ids == [resume_from + 1, resume_from + 2]


def test_single_mission_rule_under_concurrent_submissions():
    config = ServiceConfig(realtime=True)  # wall-paced so the winner stays busy
    app = create_app(config)
    with TestClient(app) as client:
        payload = {
            "instruction": "tolong tunggu 30 detik di tempat",
            "execute": True,
        }

        def submit(_: int) -> int:
            return client.post("/v1/missions", json=payload).status_code

        with ThreadPoolExecutor(max_workers=10) as pool:
            codes = list(pool.map(submit, range(10)))
        assert sorted(codes) == [202] + [409] * 9

        accepted = client.get("/v1/missions").json()
        running = [m for m in accepted if m["phase"] in ("pending", "executing")]
        assert len(running) == 1
        mission_id = running[0]["mission_id"]
        body = client.post(f"/v1/missions/{mission_id}/abort").json()
        assert body["phase"] == "aborted"
