"""HTTP surface: auth, endpoint bodies, error envelopes, event stream."""

import json
import pathlib

import pytest
from fastapi.testclient import TestClient

from agora.gateway import AuctionService, Config
from agora.gateway.api import create_app

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


class Clock:
    def __init__(self, value=1000):
        self.value = value

    def __call__(self):
        return self.value


@pytest.fixture()
def rig(tmp_path):
    clock = Clock(1_780_000_000)
    service = AuctionService(Config(data_dir=tmp_path), clock=clock)
    client = TestClient(create_app(service))
    yield client, clock, service
    service.close()


def open_session(client, name):
    response = client.post("/session", json={"name": name})
    assert response.status_code == 200
    return {"Authorization": f"Bearer {response.json()['token']}"}


def open_auction(client, headers, **overrides):
    body = {"item_name": "camera", "start_price": 500, "increment": 50, "duration": 3600}
    body.update(overrides)
    response = client.post("/auctions", json=body, headers=headers)
    assert response.status_code == 201, response.text
    return response.json()


def test_time_and_empty_listing(rig):
    client, clock, _ = rig
    assert client.get("/time").json() == {"now": clock.value}
    assert client.get("/auctions").json()["auctions"] == []


def test_session_auth_required_for_writes(rig):
    client, _, _ = rig
    response = client.post("/auctions", json={
        "item_name": "x", "start_price": 1, "increment": 1, "duration": 10,
    })
    assert response.status_code == 401
    response = client.post(
        "/auctions",
        json={"item_name": "x", "start_price": 1, "increment": 1, "duration": 10},
        headers={"Authorization": "Bearer bogus"},
    )
    assert response.status_code == 401


def test_open_bid_and_win_flow(rig):
    client, clock, _ = rig
    alice = open_session(client, "alice")
    bob = open_session(client, "bob")
    auction = open_auction(client, alice)
    assert auction["seller"] == "alice"
    aid = auction["id"]

    response = client.post(f"/auctions/{aid}/bids", json={"amount": 500}, headers=bob)
    assert response.status_code == 200
    body = response.json()
    assert body["accepted"] is True
    assert body["auction"]["current_bidder"] == "bob"

    detail = client.get(f"/auctions/{aid}").json()
    assert detail["num_bids"] == 1
    assert detail["bids"][0]["origin"] == "live"

    clock.value += 4000
    detail = client.get(f"/auctions/{aid}").json()
    assert detail["state"] == "closed"
    assert detail["winner"] == "bob"


def test_bid_too_low_error_envelope(rig):
    client, _, _ = rig
    alice = open_session(client, "alice")
    auction = open_auction(client, alice)
    response = client.post(f"/auctions/{auction['id']}/bids", json={"amount": 1}, headers=alice)
    assert response.status_code == 409
    body = response.json()
    assert body["error"] == "bid-too-low"
    assert body["required_minimum"] == 500
    assert "detail" in body


def test_conflict_slugs(rig):
    client, clock, _ = rig
    alice = open_session(client, "alice")
    auction = open_auction(client, alice, duration=10)
    aid = auction["id"]
    client.post(f"/auctions/{aid}/bids", json={"amount": 500}, headers=alice)
    response = client.post(f"/auctions/{aid}/bids", json={"amount": 500}, headers=alice)
    assert response.json()["error"] == "self-outbid"
    clock.value += 100
    response = client.post(f"/auctions/{aid}/bids", json={"amount": 9000}, headers=alice)
    assert response.status_code == 409
    assert response.json()["error"] == "auction-closed"


def test_unknown_auction_404(rig):
    client, _, _ = rig
    assert client.get("/auctions/ghost").status_code == 404
    assert client.get("/auctions/ghost").json()["error"] == "unknown-auction"


def test_invalid_auction_spec_422(rig):
    client, _, _ = rig
    alice = open_session(client, "alice")
    response = client.post(
        "/auctions",
        json={"item_name": "x", "start_price": 1, "increment": 0, "duration": 10},
        headers=alice,
    )
    assert response.status_code == 422  # pydantic bound, same family as engine's own check


def test_autobid_lifecycle_over_http(rig):
    client, _, _ = rig
    alice = open_session(client, "alice")
    bob = open_session(client, "bob")
    auction = open_auction(client, alice, start_price=50, increment=5)
    aid = auction["id"]

    created = client.post("/autobids", json={"auction_id": aid, "max_amount": 100}, headers=bob)
    assert created.status_code == 201
    autobid = created.json()
    assert autobid["status"] == "active"
    assert autobid["owner"] == "bob"

    listing = client.get("/autobids", headers=bob).json()["autobids"]
    assert [a["autobid_id"] for a in listing] == [autobid["autobid_id"]]

    carol = open_session(client, "carol")
    client.post(f"/auctions/{aid}/bids", json={"amount": 90}, headers=carol)
    assert client.get(f"/auctions/{aid}").json()["current_bidder"] == "bob"

    parked = client.post(f"/auctions/{aid}/bids", json={"amount": 200}, headers=carol)
    assert parked.json()["auction"]["current_bidder"] == "carol"
    assert client.get("/autobids", headers=bob).json()["autobids"][0]["status"] == "at-max"

    forbidden = client.post(
        f"/autobids/{autobid['autobid_id']}/raise", json={"new_max": 300}, headers=carol
    )
    assert forbidden.status_code == 403
    assert forbidden.json()["error"] == "not-owner"

    raised = client.post(
        f"/autobids/{autobid['autobid_id']}/raise", json={"new_max": 300}, headers=bob
    )
    assert raised.status_code == 200
    assert raised.json()["status"] == "active"
    assert client.get(f"/auctions/{aid}").json()["current_bidder"] == "bob"

    cancelled = client.post(f"/autobids/{autobid['autobid_id']}/cancel", headers=bob)
    assert cancelled.json()["status"] == "cancelled"
    again = client.post(f"/autobids/{autobid['autobid_id']}/cancel", headers=bob)
    assert again.status_code == 409
    assert again.json()["error"] == "inactive-autobid"


def test_not_an_increase_slug(rig):
    client, _, _ = rig
    alice = open_session(client, "alice")
    auction = open_auction(client, alice, start_price=50, increment=5)
    created = client.post(
        "/autobids", json={"auction_id": auction["id"], "max_amount": 100}, headers=alice
    ).json()
    response = client.post(
        f"/autobids/{created['autobid_id']}/raise", json={"new_max": 100}, headers=alice
    )
    assert response.status_code == 409
    assert response.json()["error"] == "not-an-increase"


def test_max_below_start_slug(rig):
    client, _, _ = rig
    alice = open_session(client, "alice")
    auction = open_auction(client, alice, start_price=500)
    response = client.post(
        "/autobids", json={"auction_id": auction["id"], "max_amount": 10}, headers=alice
    )
    assert response.status_code == 409
    assert response.json()["error"] == "max-below-start"


def test_advice_endpoint_and_refusal(rig):
    client, clock, service = rig
    alice = open_session(client, "alice")
    auction = open_auction(
        client, alice, item_name="Sony Digital Camera C-3020", category="digital-camera",
        start_price=5000, increment=50,
    )
    refusal = client.get(f"/auctions/{auction['id']}/advice", headers=alice)
    assert refusal.status_code == 409
    assert refusal.json() == {
        "error": "insufficient-history",
        "detail": "insufficient history: sample-size=0",
        "sample_size": 0,
    }
    service.import_feed((FIXTURES / "camera_feed.xml").read_text())
    advice = client.get(f"/auctions/{auction['id']}/advice", headers=alice).json()
    assert advice["recommended_bid"] == 7330
    assert advice["should_bid"] in (True, False)
    assert advice["recommended_bid_time"] == clock.value + 3600 - 300


def test_reports_endpoints(rig):
    client, clock, service = rig
    service.import_feed((FIXTURES / "ring_feed.xml").read_text())
    ring = "Gents Ring With weight 10.0g - Size 10."
    response = client.get("/reports/stats", params={"item": ring})
    assert response.status_code == 200
    body = response.json()
    # one exact match widens to the whole ring category
    assert (body["min"], body["median"], body["max"]) == (18000, 19000, 19000)
    assert body["sample_size"] == 3
    missing = client.get("/reports/stats", params={"item": "yacht"})
    assert missing.status_code == 404
    assert missing.json()["error"] == "no-data"

    thin = client.get("/reports/prediction", params={"item": ring})
    assert thin.status_code == 404
    assert thin.json()["error"] == "insufficient-history"


def test_prediction_endpoint_deterministic(rig, tmp_path):
    client, clock, service = rig
    day = 86_400
    from agora.ingest import serialize_feed
    from agora.warehouse import ClosedAuctionRecord

    rows = []
    for i in range(3):
        rows.append(ClosedAuctionRecord(
            site="ebay", item_name="camera", category="", closed_price=100 + i,
            num_bids=2, close_time=clock.value - 400 * day + i,
        ))
        rows.append(ClosedAuctionRecord(
            site="ebay", item_name="camera", category="", closed_price=200 + i,
            num_bids=2, close_time=clock.value - 100 * day + i,
        ))
    service.import_feed(serialize_feed(rows))
    first = client.get("/reports/prediction", params={"item": "camera", "seed": 42}).json()
    second = client.get("/reports/prediction", params={"item": "camera", "seed": 42}).json()
    assert first == second
    assert first["seed"] == 42
    assert first["past"] == 101
    assert first["present"] == 201
    other = client.get("/reports/prediction", params={"item": "camera", "seed": 43}).json()
    assert other["seed"] == 43


def parse_sse(text):
    frames = []
    for chunk in text.split("\n\n"):
        if not chunk.strip() or chunk.startswith(":"):
            continue
        frame = {}
        for line in chunk.splitlines():
            key, _, value = line.partition(": ")
            frame[key] = value
        if "data" in frame:
            frame["data"] = json.loads(frame["data"])
        frames.append(frame)
    return frames


def test_event_stream_backlog_and_resume(rig):
    client, _, _ = rig
    alice = open_session(client, "alice")
    auction = open_auction(client, alice)
    client.post(f"/auctions/{auction['id']}/bids", json={"amount": 500}, headers=alice)

    response = client.get("/events", params={"follow": 0})
    assert response.headers["content-type"].startswith("text/event-stream")
    frames = parse_sse(response.text)
    assert [f["event"] for f in frames] == ["AUCTION_OPENED", "BID_ACCEPTED"]
    assert [f["data"]["sequence"] for f in frames] == [1, 2]
    assert frames[0]["data"]["payload"]["item_name"] == "camera"

    resumed = client.get("/events", params={"follow": 0, "since": 1})
    assert [f["id"] for f in parse_sse(resumed.text)] == ["2"]

    via_header = client.get("/events", params={"follow": 0}, headers={"Last-Event-ID": "1"})
    assert [f["id"] for f in parse_sse(via_header.text)] == ["2"]

    bad = client.get("/events", params={"follow": 0}, headers={"Last-Event-ID": "x"})
    assert bad.status_code == 400


def test_event_stream_sees_closure_driven_by_waiters(rig):
    client, clock, _ = rig
    alice = open_session(client, "alice")
    auction = open_auction(client, alice, duration=3600)
    client.post(f"/auctions/{auction['id']}/bids", json={"amount": 500}, headers=alice)
    clock.value += 4000
    frames = parse_sse(client.get("/events", params={"follow": 0}).text)
    # the backlog fetch advances the clock domain, so the close is present
    kinds = [f["event"] for f in frames]
    assert kinds[-2:] == ["CLOSED", "RECORD_ADDED"]


def test_validation_errors_are_422(rig):
    client, _, _ = rig
    alice = open_session(client, "alice")
    response = client.post("/auctions", json={"item_name": "", "start_price": 1,
                                              "increment": 1, "duration": 10}, headers=alice)
    assert response.status_code == 422
    response = client.post("/session", json={"name": ""})
    assert response.status_code == 422
    assert client.get("/reports/stats").status_code == 422  # item is required
