"""Event log durability, configuration, and the event-sourced service."""

import json
import pathlib
import random

import pytest

from agora.engine import BidTooLow, SelfOutbid
from agora.gateway import (
    AdvisorRefused,
    AuctionService,
    Config,
    CorruptLog,
    EventKind,
    EventLog,
    NotOwner,
    UnknownAuction,
    UnknownAutobid,
    load_config,
    read_log,
)
from agora.gateway.config import ConfigError
from agora.warehouse import InsufficientHistory

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


class Clock:
    def __init__(self, value=1000):
        self.value = value

    def __call__(self):
        return self.value


def service_at(tmp_path, clock=None, **overrides):
    config = Config(data_dir=tmp_path, **overrides)
    return AuctionService(config, clock=clock)


# -- event log ---------------------------------------------------------------


def test_event_log_round_trip(tmp_path):
    log = EventLog(tmp_path)
    log.open_existing([])
    first = log.append(EventKind.AUCTION_OPENED, {"auction_id": "a1"}, time=5)
    second = log.append(EventKind.BID_ACCEPTED, {"auction_id": "a1", "amount": 100}, time=6)
    assert (first.sequence, second.sequence) == (1, 2)
    log.close()
    events, truncated = read_log(tmp_path)
    assert truncated == 0
    assert [e.kind for e in events] == [EventKind.AUCTION_OPENED, EventKind.BID_ACCEPTED]
    assert events[1].payload["amount"] == 100


def test_event_lines_have_fixed_key_order(tmp_path):
    log = EventLog(tmp_path)
    log.open_existing([])
    log.append(EventKind.AUCTION_OPENED, {"z": 1, "a": 2}, time=5)
    log.close()
    line = (tmp_path / "events.log").read_text().strip()
    assert line.startswith('{"sequence": 1, "time": 5, "kind": "AUCTION_OPENED", "payload": ')
    # payload keys keep insertion order, not alphabetical
    assert '"z": 1, "a": 2' in line


def test_read_log_missing_file_is_empty(tmp_path):
    assert read_log(tmp_path) == ([], 0)


def test_truncated_final_line_is_recoverable(tmp_path):
    log = EventLog(tmp_path)
    log.open_existing([])
    for i in range(3):
        log.append(EventKind.BID_ACCEPTED, {"n": i}, time=i)
    log.close()
    path = tmp_path / "events.log"
    text = path.read_text()
    path.write_text(text[: len(text) - 25])  # cut into the final record
    events, truncated = read_log(tmp_path)
    assert truncated == 1
    assert [e.payload["n"] for e in events] == [0, 1]
    # reopening drops the stub and appends cleanly after it
    log2 = EventLog(tmp_path)
    log2.open_existing(events)
    appended = log2.append(EventKind.BID_ACCEPTED, {"n": 9}, time=9)
    assert appended.sequence == 3
    log2.close()
    events2, truncated2 = read_log(tmp_path)
    assert truncated2 == 0
    assert [e.payload["n"] for e in events2] == [0, 1, 9]


def test_mid_file_corruption_refuses_to_load(tmp_path):
    log = EventLog(tmp_path)
    log.open_existing([])
    for i in range(3):
        log.append(EventKind.BID_ACCEPTED, {"n": i}, time=i)
    log.close()
    path = tmp_path / "events.log"
    lines = path.read_text().splitlines()
    lines[1] = lines[1][:20]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptLog):
        read_log(tmp_path)


def test_sequence_gap_refuses_to_load(tmp_path):
    log = EventLog(tmp_path)
    log.open_existing([])
    log.append(EventKind.BID_ACCEPTED, {"n": 0}, time=0)
    log.close()
    path = tmp_path / "events.log"
    with path.open("a") as fh:
        fh.write('{"sequence": 3, "time": 1, "kind": "BID_ACCEPTED", "payload": {}}\n')
    with pytest.raises(CorruptLog) as exc:
        read_log(tmp_path)
    assert "2" in str(exc.value)


def test_truncated_fixture_recovers_three_events(tmp_path):
    data = (FIXTURES / "truncated_events.log").read_bytes()
    (tmp_path / "events.log").write_bytes(data)
    events, truncated = read_log(tmp_path)
    assert truncated == 1
    assert len(events) == 3
    assert events[0].kind is EventKind.AUCTION_OPENED
    assert events[2].payload["bidder"] == "bob"


# -- config --------------------------------------------------------------------


def test_config_defaults():
    config = load_config(path=None, env={})
    assert config.port == 8765
    assert config.lookback_days == 90
    assert config.min_history == 3
    assert config.period_days == 365
    assert config.default_seed == 1


def test_config_file_and_env_overrides(tmp_path):
    cfg = tmp_path / "agora.conf"
    cfg.write_text("# comment\nport=9000\ndata_dir=/tmp/x\n\nlookback_days = 30\n")
    config = load_config(path=cfg, env={"AGORA_MIN_HISTORY": "5"})
    assert config.port == 9000
    assert str(config.data_dir) == "/tmp/x"
    assert config.lookback_days == 30
    assert config.min_history == 5


def test_config_env_beats_file(tmp_path):
    cfg = tmp_path / "agora.conf"
    cfg.write_text("port=9000\n")
    config = load_config(path=cfg, env={"AGORA_PORT": "9001"})
    assert config.port == 9001


def test_config_rejects_unknown_and_invalid(tmp_path):
    cfg = tmp_path / "agora.conf"
    cfg.write_text("knob=7\n")
    with pytest.raises(ConfigError):
        load_config(path=cfg, env={})
    cfg.write_text("port=zero\n")
    with pytest.raises(ConfigError):
        load_config(path=cfg, env={})
    cfg.write_text("port=-1\n")
    with pytest.raises(ConfigError):
        load_config(path=cfg, env={})


# -- service lifecycle -----------------------------------------------------------


def test_auction_lifecycle_emits_expected_events(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    token, alice = service.register_session("alice")
    assert isinstance(token, str) and len(token) >= 16
    detail = service.open_auction(
        item_name="camera", start_price=500, increment=50, duration=600, seller="seller",
    )
    auction_id = detail["id"]
    assert detail["state"] == "open"
    assert detail["close_time"] == 1600

    service.place_bid(auction_id, "alice", 500)
    clock.value = 1200
    detail = service.place_bid(auction_id, "bob", 600)
    assert detail["current_bidder"] == "bob"
    assert detail["num_bids"] == 2

    clock.value = 1700  # past close; any read advances and closes
    summary = service.list_auctions()[0]
    assert summary["state"] == "closed"
    assert summary["winner"] == "bob"
    assert summary["winning_amount"] == 600

    kinds = [e.kind for e in service.events_since(0)]
    assert kinds == [
        EventKind.AUCTION_OPENED,
        EventKind.BID_ACCEPTED,
        EventKind.BID_ACCEPTED,
        EventKind.CLOSED,
        EventKind.RECORD_ADDED,
    ]
    service.close()


def test_closing_with_winner_feeds_the_warehouse(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock, min_history=1)
    for i in range(3):
        clock.value = 1000 + i  # distinct close times, distinct warehouse keys
        detail = service.open_auction(
            item_name="camera", start_price=100, increment=10, duration=100, seller="s",
        )
        service.place_bid(detail["id"], "alice", 150 + i * 10)
    clock.value = 2000
    service.poll()
    report = service.stats_report("camera")
    assert report["sample_size"] == 3
    assert report["min"] == 150
    assert report["max"] == 170
    records = service.warehouse.records()
    assert all(r.site == "local" for r in records)
    service.close()


def test_no_winner_close_adds_no_record(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    service.open_auction(item_name="x", start_price=1, increment=1, duration=10, seller="s")
    clock.value = 5000
    service.poll()
    kinds = [e.kind for e in service.events_since(0)]
    assert EventKind.RECORD_ADDED not in kinds
    assert kinds[-1] == EventKind.CLOSED
    assert service.events_since(0)[-1].payload["winner"] is None
    service.close()


def test_rejected_bids_logged_and_raised(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    detail = service.open_auction(item_name="x", start_price=100, increment=10, duration=600, seller="s")
    aid = detail["id"]
    with pytest.raises(BidTooLow):
        service.place_bid(aid, "alice", 90)
    service.place_bid(aid, "alice", 100)
    with pytest.raises(SelfOutbid):
        service.place_bid(aid, "alice", 100)
    rejected = [e for e in service.events_since(0) if e.kind is EventKind.BID_REJECTED]
    assert [e.payload["reason"] for e in rejected] == ["bid-too-low", "self-outbid"]
    assert rejected[0].payload["required_minimum"] == 100
    service.close()


def test_unknown_ids_raise(tmp_path):
    service = service_at(tmp_path, clock=Clock())
    with pytest.raises(UnknownAuction):
        service.place_bid("nope", "alice", 100)
    with pytest.raises(UnknownAutobid):
        service.raise_max("nope", 100)
    service.close()


def test_autobid_war_settles_before_call_returns(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    _, alice = service.register_session("alice")
    _, bob = service.register_session("bob")
    detail = service.open_auction(item_name="x", start_price=50, increment=5, duration=3600, seller="s")
    aid = detail["id"]

    a_info = service.create_autobid(aid, alice, max_amount=100)
    assert a_info["status"] == "active"
    b_info = service.create_autobid(aid, bob, max_amount=80)
    # the whole duel happened inside create_autobid
    assert b_info["status"] == "at-max"
    detail = service.auction_detail(aid)
    assert detail["current_bidder"] == "alice"
    assert detail["current_bid"] == 80
    at_max = [e for e in service.events_since(0) if e.kind is EventKind.AUTOBID_AT_MAX]
    assert len(at_max) == 1 and at_max[0].payload["owner"] == "bob"
    service.close()


def test_live_bid_triggers_proxy_response(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    _, alice = service.register_session("alice")
    detail = service.open_auction(item_name="x", start_price=50, increment=5, duration=3600, seller="s")
    aid = detail["id"]
    service.create_autobid(aid, alice, max_amount=200)
    detail = service.place_bid(aid, "carol", 120)
    # proxy answered within the same call
    assert detail["current_bidder"] == "alice"
    assert detail["current_bid"] == 125
    last_bid = detail["bids"][-1]
    assert last_bid["origin"] == "auto"
    service.close()


def test_raise_max_requires_owner_and_reactivates(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    _, alice = service.register_session("alice")
    _, bob = service.register_session("bob")
    detail = service.open_auction(item_name="x", start_price=50, increment=5, duration=3600, seller="s")
    aid = detail["id"]
    info = service.create_autobid(aid, alice, max_amount=60)
    service.place_bid(aid, "carol", 70)
    assert service.autobid_info(info["autobid_id"])["status"] == "at-max"

    with pytest.raises(NotOwner):
        service.raise_max(info["autobid_id"], 200, requester=bob)
    raised = service.raise_max(info["autobid_id"], 200, requester=alice)
    assert raised["status"] == "active"
    assert service.auction_detail(aid)["current_bidder"] == "alice"
    service.close()


def test_cancel_autobid_stops_reactions(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    _, alice = service.register_session("alice")
    detail = service.open_auction(item_name="x", start_price=50, increment=5, duration=3600, seller="s")
    aid = detail["id"]
    info = service.create_autobid(aid, alice, max_amount=500)
    cancelled = service.cancel_autobid(info["autobid_id"], requester=alice)
    assert cancelled["status"] == "cancelled"
    detail = service.place_bid(aid, "carol", 60)
    assert detail["current_bidder"] == "carol"  # no proxy answer
    service.close()


def test_advice_refused_then_served_after_import(tmp_path):
    clock = Clock(1_780_000_000)
    service = service_at(tmp_path, clock=clock)
    _, alice = service.register_session("alice")
    detail = service.open_auction(
        item_name="Sony Digital Camera C-3020", start_price=5000, increment=50,
        duration=3600, seller="s", category="digital-camera",
    )
    aid = detail["id"]
    with pytest.raises(AdvisorRefused) as exc:
        service.get_advice(aid, requester=alice)
    assert exc.value.sample_size == 0

    summary, issues = service.import_feed((FIXTURES / "camera_feed.xml").read_text())
    assert issues == []
    assert summary.loaded == 7

    advice = service.get_advice(aid, requester=alice)
    assert advice["recommended_bid"] == 7330
    assert advice["sample_size"] == 7
    assert advice["recommended_bid_time"] == clock.value + 3600 - 300
    assert advice["xml"].startswith("<advice-response>")
    served = [e for e in service.events_since(0) if e.kind is EventKind.ADVICE_SERVED]
    assert served and served[0].payload["requester"] == "alice"
    service.close()


def test_import_feed_counts_duplicates_and_issues(tmp_path):
    service = service_at(tmp_path, clock=Clock())
    text = (FIXTURES / "feed_missing_field.xml").read_text()
    summary, issues = service.import_feed(text)
    assert summary.loaded == 2
    assert len(issues) == 1
    summary2, _ = service.import_feed(text)
    assert summary2.loaded == 0
    assert summary2.duplicates == 2
    record_events = [e for e in service.events_since(0) if e.kind is EventKind.RECORD_ADDED]
    assert len(record_events) == 2
    service.close()


def test_prediction_report_uses_configured_period(tmp_path):
    clock = Clock(1_780_000_000)
    service = service_at(tmp_path, clock=clock, period_days=10, min_history=1)
    day = 86_400
    past_time = clock.value - 15 * day
    present_time = clock.value - 5 * day
    feed_rows = []
    for i, (price, when) in enumerate([(100, past_time), (110, present_time)]):
        feed_rows.append((price, when + i))
    from agora.ingest import serialize_feed
    from agora.warehouse import ClosedAuctionRecord

    records = [
        ClosedAuctionRecord(site="ebay", item_name="camera", category="", closed_price=price,
                            num_bids=3, close_time=when)
        for price, when in feed_rows
    ]
    service.import_feed(serialize_feed(records))
    report = service.prediction_report("camera", seed=0)

    from agora.warehouse import SeededRng, predict
    expected = predict(100, 110, SeededRng(0), item_name="camera")
    assert report["variant1"] == expected.variant1
    assert report["variant2"] == expected.variant2
    assert report["future"] == expected.future
    assert report["seed"] == 0

    with pytest.raises(InsufficientHistory):
        service.prediction_report("nothing")
    service.close()


def test_wait_for_events_advances_the_clock_domain(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    service.open_auction(item_name="x", start_price=1, increment=1, duration=10, seller="s")
    clock.value = 2000
    events = service.wait_for_events(1, timeout=0.01)
    assert [e.kind for e in events] == [EventKind.CLOSED]
    service.close()


# -- crash and replay ------------------------------------------------------------


def snapshot(service):
    return {
        "auctions": service.list_auctions(),
        "autobids": sorted(
            (service.autobid_info(i) for i in service.autobids), key=lambda d: d["autobid_id"]
        ),
        "records": [tuple(r.key()) for r in service.warehouse.records()],
        "last_sequence": service.log.last_sequence,
    }


def test_replay_reproduces_live_state(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    _, alice = service.register_session("alice")
    _, bob = service.register_session("bob")
    d1 = service.open_auction(item_name="camera", start_price=100, increment=10,
                              duration=3600, seller="s", category="cam")
    d2 = service.open_auction(item_name="lens", start_price=50, increment=5,
                              duration=600, seller="s")
    service.create_autobid(d1["id"], alice, max_amount=300)
    service.place_bid(d1["id"], "bob", 200)
    info = service.create_autobid(d2["id"], bob, max_amount=80)
    service.place_bid(d2["id"], "carol", 60)
    service.raise_max(info["autobid_id"], 90, requester=bob)
    clock.value = 1700  # closes the short auction
    before = snapshot(service)
    service.close()

    replayed = service_at(tmp_path, clock=clock)
    after = snapshot(replayed)
    assert after == before
    # replay emitted nothing new
    assert replayed.log.last_sequence == before["last_sequence"]
    replayed.close()


def test_replay_after_truncation_matches_prefix(tmp_path):
    clock = Clock(1000)
    service = service_at(tmp_path, clock=clock)
    detail = service.open_auction(item_name="x", start_price=100, increment=10,
                                  duration=3600, seller="s")
    service.place_bid(detail["id"], "alice", 100)
    service.place_bid(detail["id"], "bob", 110)
    service.close()
    path = tmp_path / "events.log"
    text = path.read_text()
    path.write_text(text[:-30])  # damage the last record

    replayed = service_at(tmp_path, clock=clock)
    assert replayed.recovered_truncated == 1
    detail = replayed.auction_detail("a1")
    assert detail["num_bids"] == 1  # bob's bid was on the damaged line
    assert detail["current_bidder"] == "alice"
    # service runs on: the next event reuses the damaged record's sequence
    replayed.place_bid("a1", "carol", 200)
    assert replayed.auction_detail("a1")["current_bidder"] == "carol"
    replayed.close()


def test_random_operation_sequences_survive_restart(tmp_path):
    for seed in range(8):
        data_dir = tmp_path / f"run{seed}"
        data_dir.mkdir()
        rng = random.Random(seed)
        clock = Clock(1000)
        service = service_at(data_dir, clock=clock)
        sessions = [service.register_session(f"u{i}")[1] for i in range(3)]
        auction_ids = []
        autobid_ids = []
        for _ in range(rng.randrange(5, 40)):
            op = rng.randrange(6)
            clock.value += rng.randrange(0, 400)
            try:
                if op == 0 or not auction_ids:
                    detail = service.open_auction(
                        item_name=rng.choice(["camera", "lens"]),
                        start_price=rng.randrange(10, 200),
                        increment=rng.randrange(1, 20),
                        duration=rng.randrange(100, 2000),
                        seller="s",
                    )
                    auction_ids.append(detail["id"])
                elif op == 1:
                    service.place_bid(
                        rng.choice(auction_ids),
                        rng.choice(["u0", "u1", "u2", "carol"]),
                        rng.randrange(5, 600),
                    )
                elif op == 2:
                    info = service.create_autobid(
                        rng.choice(auction_ids), rng.choice(sessions), rng.randrange(50, 700)
                    )
                    autobid_ids.append(info["autobid_id"])
                elif op == 3 and autobid_ids:
                    service.raise_max(rng.choice(autobid_ids), rng.randrange(100, 1000))
                elif op == 4 and autobid_ids:
                    service.cancel_autobid(rng.choice(autobid_ids))
                else:
                    service.poll()
            except Exception:
                continue  # rejected operations still write events; that is the point
        before = snapshot(service)
        service.close()
        replayed = service_at(data_dir, clock=clock)
        assert snapshot(replayed) == before
        replayed.close()
