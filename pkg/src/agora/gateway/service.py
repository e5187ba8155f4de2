"""Event-sourced auction service: every state change is an appended event.

The live path decides through the engine/agent modules and then records
what happened; replay applies recorded events directly, with no
re-deciding, so a restarted service reports exactly what the stopped one
did. One re-entrant lock serializes all state changes, which also gives
per-auction linearizability.

Auto-bids are platform agents: when a bid displaces them the service
sends an ACL INFORM to each displaced agent and then pumps mailboxes to
quiescence, so an entire proxy war settles before the triggering call
returns.
"""

from __future__ import annotations

import re
import threading
import time as _time
import uuid
from dataclasses import dataclass
from typing import Callable, Optional

from .. import autobid as autobid_mod
from .. import engine
from ..acl import AclMessage, AgentId, AgentPlatform, DuplicateName, Performative
from ..advisor import SERVICE_TYPE, AdvisorAgent
from ..autobid import AutoBidConfig, AutoBidStatus, DecisionKind
from ..engine import Auction, AuctionOutcome, AuctionState, Bid, BidOrigin
from ..ingest import (
    AdviceRequest,
    LoadSummary,
    ParseIssue,
    load,
    parse_advice_response,
    parse_feed,
    serialize_advice_request,
)
from ..warehouse import ClosedAuctionRecord, SeededRng, Warehouse, predict
from .config import Config
from .events import Event, EventKind, EventLog, read_log

LOCAL_SITE = "local"  # site label for records from this platform's own closures


class GatewayError(Exception):
    pass


class UnknownAuction(GatewayError):
    pass


class UnknownAutobid(GatewayError):
    pass


class NoAdvisor(GatewayError):
    pass


class AdvisorRefused(GatewayError):
    def __init__(self, message: str, sample_size: int):
        super().__init__(message)
        self.sample_size = sample_size


class NotOwner(GatewayError):
    pass


@dataclass
class _AutobidEntry:
    id: str
    config: AutoBidConfig
    agent: AgentId


class AuctionService:
    def __init__(self, config: Config, clock: Optional[Callable[[], int]] = None):
        self.config = config
        self.clock = clock if clock is not None else (lambda: int(_time.time()))
        self._lock = threading.RLock()
        self._changed = threading.Condition(self._lock)
        self.platform = AgentPlatform()
        self.warehouse = Warehouse()
        self.auctions: dict[str, Auction] = {}
        self.autobids: dict[str, _AutobidEntry] = {}
        self.sessions: dict[str, AgentId] = {}
        self._auction_counter = 0
        self._autobid_counter = 0
        self._auctioneer = self.platform.ams_register("auctioneer")
        self.advisor = AdvisorAgent(
            self.platform,
            self.warehouse,
            clock=self.clock,
            lookback_days=config.lookback_days,
            min_history=config.min_history,
        )
        events, self.recovered_truncated = read_log(config.data_dir)
        for event in events:
            self._apply(event)
        self.log = EventLog(config.data_dir)
        self.log.open_existing(events)

    def close(self) -> None:
        self.log.close()

    # -- event plumbing ----------------------------------------------------

    def _emit(self, kind: EventKind, payload: dict) -> Event:
        event = self.log.append(kind, payload, self.clock())
        self._changed.notify_all()
        return event

    def events_since(self, sequence: int) -> list[Event]:
        with self._lock:
            self._advance()
            return self.log.events_since(sequence)

    def wait_for_events(self, sequence: int, timeout: float) -> list[Event]:
        """Pending events past `sequence`, blocking up to timeout for news."""
        with self._changed:
            self._advance()
            events = self.log.events_since(sequence)
            if events:
                return events
            self._changed.wait(timeout)
            return self.log.events_since(sequence)

    def poll(self) -> None:
        """Process due closures; the serve loop calls this every second."""
        with self._lock:
            self._advance()

    # -- time --------------------------------------------------------------

    def _advance(self) -> None:
        now = self.clock()
        for auction in self.auctions.values():
            if auction.state is not AuctionState.OPEN:
                continue
            for event in engine.tick(auction, now):
                # EnteredFinalMinute stays internal: stream consumers see
                # close_time and flag the window themselves.
                if isinstance(event, engine.Closed):
                    self._emit(
                        EventKind.CLOSED,
                        {
                            "auction_id": auction.id,
                            "winner": event.outcome.winner,
                            "amount": event.outcome.winning_amount,
                            "closed_at": event.outcome.closed_at,
                        },
                    )
                    self._record_sale(auction, event.outcome)

    def _record_sale(self, auction: Auction, outcome: AuctionOutcome) -> None:
        if outcome.winner is None or outcome.winning_amount is None:
            return
        record = ClosedAuctionRecord(
            site=LOCAL_SITE,
            item_name=auction.item_name,
            category=auction.category,
            closed_price=outcome.winning_amount,
            num_bids=len(auction.bids),
            close_time=outcome.closed_at,
            quantity=1,
        )
        if self.warehouse.add_record(record):
            self._emit(EventKind.RECORD_ADDED, self._record_payload(record))

    @staticmethod
    def _record_payload(record: ClosedAuctionRecord) -> dict:
        return {
            "site": record.site,
            "item_name": record.item_name,
            "category": record.category,
            "closed_price": record.closed_price,
            "num_bids": record.num_bids,
            "close_time": record.close_time,
            "quantity": record.quantity,
            "item_code": record.item_code,
        }

    # -- sessions ----------------------------------------------------------

    def register_session(self, name: str) -> tuple[str, AgentId]:
        """Bearer token for a named participant; the name becomes an agent."""
        with self._lock:
            try:
                aid = self.platform.ams_register(name)
            except DuplicateName:
                aid = self.platform.ams_lookup(name)
            token = uuid.uuid4().hex
            self.sessions[token] = aid
            return token, aid

    def session(self, token: str) -> Optional[AgentId]:
        with self._lock:
            return self.sessions.get(token)

    # -- lookups -----------------------------------------------------------

    def _auction(self, auction_id: str) -> Auction:
        auction = self.auctions.get(auction_id)
        if auction is None:
            raise UnknownAuction(f"no auction {auction_id!r}")
        return auction

    def _autobid(self, autobid_id: str) -> _AutobidEntry:
        entry = self.autobids.get(autobid_id)
        if entry is None:
            raise UnknownAutobid(f"no auto-bid {autobid_id!r}")
        return entry

    # -- write operations ----------------------------------------------------

    def open_auction(
        self,
        item_name: str,
        start_price: int,
        increment: int,
        duration: int,
        seller: str,
        category: str = "",
    ) -> dict:
        with self._lock:
            self._advance()
            auction = engine.open_auction(
                item_name=item_name,
                category=category,
                seller=seller,
                start_price=start_price,
                increment=increment,
                open_time=self.clock(),
                duration=duration,
                auction_id=f"a{self._auction_counter + 1}",
            )
            self._auction_counter += 1
            self.auctions[auction.id] = auction
            self._emit(
                EventKind.AUCTION_OPENED,
                {
                    "auction_id": auction.id,
                    "item_name": auction.item_name,
                    "category": auction.category,
                    "seller": auction.seller,
                    "start_price": auction.start_price,
                    "increment": auction.increment,
                    "open_time": auction.open_time,
                    "close_time": auction.close_time,
                },
            )
            return self.auction_detail(auction.id)

    def place_bid(self, auction_id: str, bidder: str, amount: int) -> dict:
        """Live bid; engine rejections are logged and re-raised verbatim."""
        with self._lock:
            self._advance()
            auction = self._auction(auction_id)
            self._accept_bid(auction, bidder, amount, BidOrigin.LIVE, autobid_id=None)
            self._pump()
            return self.auction_detail(auction_id)

    def _accept_bid(
        self,
        auction: Auction,
        bidder: str,
        amount: int,
        origin: BidOrigin,
        autobid_id: Optional[str],
    ) -> None:
        base = {"auction_id": auction.id, "bidder": bidder, "amount": amount}
        try:
            bid, events = engine.place_bid(auction, bidder, amount, self.clock(), origin=origin)
        except engine.BidTooLow as exc:
            self._emit(
                EventKind.BID_REJECTED,
                {**base, "reason": "bid-too-low", "required_minimum": exc.required_minimum},
            )
            raise
        except engine.AuctionClosed:
            self._emit(EventKind.BID_REJECTED, {**base, "reason": "auction-closed"})
            raise
        except engine.SelfOutbid:
            self._emit(EventKind.BID_REJECTED, {**base, "reason": "self-outbid"})
            raise
        payload = {
            **base,
            "time": bid.timestamp,
            "origin": origin.value,
            "num_bids": len(auction.bids),
        }
        if autobid_id is not None:
            payload["autobid_id"] = autobid_id
        self._emit(EventKind.BID_ACCEPTED, payload)
        for event in events:
            if isinstance(event, engine.Extended):
                self._emit(
                    EventKind.EXTENDED,
                    {"auction_id": auction.id, "new_close_time": event.new_close_time},
                )
        self._notify_displaced(auction)

    def _notify_displaced(self, auction: Auction) -> None:
        top = engine.winning_bid(auction)
        if top is None:
            return
        for entry in self.autobids.values():
            if entry.config.auction_id != auction.id:
                continue
            if entry.config.status is not AutoBidStatus.ACTIVE:
                continue
            if entry.config.owner.name == top.bidder:
                continue
            self.platform.acc_send(
                AclMessage(
                    performative=Performative.INFORM,
                    sender=self._auctioneer,
                    receivers=(entry.agent,),
                    content=f"outbid auction={auction.id} current={top.amount}",
                    conversation_id=self.platform.next_conversation_id(),
                )
            )

    def _pump(self) -> None:
        # Deliver outbid notifications until every agent goes quiet.
        progress = True
        while progress:
            progress = False
            for entry in list(self.autobids.values()):
                message = self.platform.receive(entry.agent)
                if message is None:
                    continue
                progress = True
                if message.performative is Performative.INFORM:
                    self._react(entry)

    def _react(self, entry: _AutobidEntry) -> None:
        config = entry.config
        if config.status is not AutoBidStatus.ACTIVE:
            return
        auction = self.auctions.get(config.auction_id)
        if auction is None or auction.state is not AuctionState.OPEN:
            return
        top = engine.winning_bid(auction)
        if top is None or top.bidder == config.owner.name:
            return
        decision = autobid_mod.on_outbid(config, auction, top.amount)
        self._apply_decision(entry, auction, decision)

    def _apply_decision(
        self, entry: _AutobidEntry, auction: Auction, decision: autobid_mod.AutoBidDecision
    ) -> None:
        if decision.kind is DecisionKind.REBID:
            assert decision.amount is not None
            try:
                self._accept_bid(
                    auction, entry.config.owner.name, decision.amount, BidOrigin.AUTO, entry.id
                )
            except engine.EngineError:
                # Lost a race with the close; the rejection is already logged.
                return
        elif decision.kind is DecisionKind.AWAIT_OWNER:
            self._emit(
                EventKind.AUTOBID_AT_MAX,
                {
                    "autobid_id": entry.id,
                    "auction_id": auction.id,
                    "owner": entry.config.owner.name,
                    "max_amount": entry.config.max_amount,
                },
            )

    def _autobid_payload(self, entry: _AutobidEntry) -> dict:
        return {
            "autobid_id": entry.id,
            "auction_id": entry.config.auction_id,
            "owner": entry.config.owner.name,
            "owner_address": entry.config.owner.address,
            "max_amount": entry.config.max_amount,
            "status": entry.config.status.value,
        }

    def create_autobid(self, auction_id: str, owner: AgentId, max_amount: int) -> dict:
        with self._lock:
            self._advance()
            auction = self._auction(auction_id)
            config = AutoBidConfig(auction_id=auction_id, owner=owner, max_amount=max_amount)
            decision = autobid_mod.create_autobid(config, auction)
            self._autobid_counter += 1
            entry = _AutobidEntry(
                id=f"ab{self._autobid_counter}",
                config=config,
                agent=self.platform.ams_register(f"autobid-{self._autobid_counter}"),
            )
            self.autobids[entry.id] = entry
            self._emit(EventKind.AUTOBID_CREATED, self._autobid_payload(entry))
            self._apply_decision(entry, auction, decision)
            self._pump()
            return self.autobid_info(entry.id)

    def raise_max(self, autobid_id: str, new_max: int, requester: Optional[AgentId] = None) -> dict:
        with self._lock:
            self._advance()
            entry = self._autobid(autobid_id)
            self._check_owner(entry, requester)
            auction = self._auction(entry.config.auction_id)
            decision = autobid_mod.raise_max(entry.config, auction, new_max)
            # Same kind as creation: replay treats AUTOBID_CREATED as upsert.
            self._emit(EventKind.AUTOBID_CREATED, self._autobid_payload(entry))
            self._apply_decision(entry, auction, decision)
            self._pump()
            return self.autobid_info(autobid_id)

    def cancel_autobid(self, autobid_id: str, requester: Optional[AgentId] = None) -> dict:
        with self._lock:
            self._advance()
            entry = self._autobid(autobid_id)
            self._check_owner(entry, requester)
            autobid_mod.cancel(entry.config)
            self._emit(
                EventKind.AUTOBID_CANCELLED,
                {
                    "autobid_id": entry.id,
                    "auction_id": entry.config.auction_id,
                    "owner": entry.config.owner.name,
                },
            )
            return self.autobid_info(autobid_id)

    @staticmethod
    def _check_owner(entry: _AutobidEntry, requester: Optional[AgentId]) -> None:
        if requester is not None and requester.name != entry.config.owner.name:
            raise NotOwner(f"auto-bid {entry.id} belongs to {entry.config.owner.name}")

    def get_advice(self, auction_id: str, requester: Optional[AgentId] = None) -> dict:
        """Four-field request built from live state, served over the protocol."""
        with self._lock:
            self._advance()
            auction = self._auction(auction_id)
            providers = self.platform.df_search(service_type=SERVICE_TYPE)
            if not providers:
                raise NoAdvisor(f"no {SERVICE_TYPE!r} service registered")
            now = self.clock()
            current = engine.current_amount(auction)
            request = AdviceRequest(
                item_name=auction.item_name,
                current_bid=current if current is not None else auction.start_price,
                num_bids=len(auction.bids),
                remaining_duration=max(0, auction.close_time - now),
            )
            initiator = requester if requester is not None else self._auctioneer
            outcome = self.platform.run_request_protocol(
                initiator, providers[0].provider, serialize_advice_request(request)
            )
            final = outcome.final
            if final.performative is Performative.REFUSE:
                match = re.search(r"sample-size=(\d+)", final.content)
                raise AdvisorRefused(final.content, int(match.group(1)) if match else 0)
            if final.performative is not Performative.INFORM:
                raise GatewayError(f"advice failed: {final.content}")
            parsed = parse_advice_response(final.content)
            self._emit(
                EventKind.ADVICE_SERVED,
                {"auction_id": auction_id, "requester": initiator.name, **parsed},
            )
            return {
                "auction_id": auction_id,
                "item_name": auction.item_name,
                **parsed,
                "xml": final.content,
            }

    def import_feed(self, document: str) -> tuple[LoadSummary, list[ParseIssue]]:
        """Parse and load a feed; each stored record becomes an event."""
        records, parse_issues = parse_feed(document)
        with self._lock:
            summary = load(
                records,
                self.warehouse,
                on_loaded=lambda rec: self._emit(EventKind.RECORD_ADDED, self._record_payload(rec)),
            )
        return summary, parse_issues

    # -- read operations -----------------------------------------------------

    def now(self) -> int:
        return self.clock()

    def _summary(self, auction: Auction) -> dict:
        top = engine.winning_bid(auction)
        outcome = auction.outcome
        return {
            "id": auction.id,
            "item_name": auction.item_name,
            "category": auction.category,
            "seller": auction.seller,
            "state": auction.state.value,
            "start_price": auction.start_price,
            "increment": auction.increment,
            "open_time": auction.open_time,
            "close_time": auction.close_time,
            "current_bid": top.amount if top else None,
            "current_bidder": top.bidder if top else None,
            "num_bids": len(auction.bids),
            "required_minimum": engine.required_minimum(auction),
            "winner": outcome.winner if outcome else None,
            "winning_amount": outcome.winning_amount if outcome else None,
        }

    def list_auctions(self) -> list[dict]:
        with self._lock:
            self._advance()
            return [self._summary(a) for a in self.auctions.values()]

    def auction_detail(self, auction_id: str) -> dict:
        with self._lock:
            self._advance()
            auction = self._auction(auction_id)
            detail = self._summary(auction)
            detail["bids"] = [
                {"bidder": b.bidder, "amount": b.amount, "time": b.timestamp, "origin": b.origin.value}
                for b in auction.bids
            ]
            detail["autobids"] = [
                {"autobid_id": e.id, "owner": e.config.owner.name, "status": e.config.status.value}
                for e in self.autobids.values()
                if e.config.auction_id == auction_id
            ]
            return detail

    def autobid_info(self, autobid_id: str) -> dict:
        with self._lock:
            entry = self._autobid(autobid_id)
            return self._autobid_payload(entry)

    def autobids_for(self, owner_name: str) -> list[dict]:
        with self._lock:
            return [
                self._autobid_payload(e)
                for e in self.autobids.values()
                if e.config.owner.name == owner_name
            ]

    def stats_report(self, item_name: str) -> dict:
        with self._lock:
            report = self.warehouse.stats_report(item_name, min_history=self.config.min_history)
            return {
                "item_name": report.item_name,
                "min": report.min,
                "median": report.median,
                "max": report.max,
                "quantity_sold": report.quantity_sold,
                "sample_size": report.sample_size,
            }

    def prediction_report(self, item_name: str, seed: Optional[int] = None) -> dict:
        with self._lock:
            past, present = self.warehouse.aggregate_periods(
                item_name,
                period_length=self.config.period_days * 86400,
                now=self.clock(),
                min_history=self.config.min_history,
            )
            rng = SeededRng(seed if seed is not None else self.config.default_seed)
            prediction = predict(past, present, rng, item_name=item_name)
            return {
                "item_name": prediction.item_name,
                "past": prediction.past,
                "present": prediction.present,
                "variant1": prediction.variant1,
                "variant2": prediction.variant2,
                "future": prediction.future,
                "seed": prediction.seed,
            }

    # -- replay ----------------------------------------------------------------

    def _apply(self, event: Event) -> None:
        """Recorded facts applied directly; no engine or agent re-decisions."""
        kind = event.kind
        payload = event.payload
        if kind is EventKind.AUCTION_OPENED:
            auction = Auction(
                id=payload["auction_id"],
                item_name=payload["item_name"],
                category=payload["category"],
                seller=payload["seller"],
                start_price=payload["start_price"],
                increment=payload["increment"],
                open_time=payload["open_time"],
                close_time=payload["close_time"],
            )
            self.auctions[auction.id] = auction
            self._auction_counter = max(self._auction_counter, _numeric_suffix("a", auction.id))
        elif kind is EventKind.BID_ACCEPTED:
            auction = self.auctions[payload["auction_id"]]
            auction.bids.append(
                Bid(
                    auction_id=auction.id,
                    bidder=payload["bidder"],
                    amount=payload["amount"],
                    timestamp=payload["time"],
                    origin=BidOrigin(payload["origin"]),
                )
            )
        elif kind is EventKind.EXTENDED:
            auction = self.auctions[payload["auction_id"]]
            auction.close_time = payload["new_close_time"]
            auction.final_minute_announced = False
        elif kind is EventKind.AUTOBID_CREATED:
            autobid_id = payload["autobid_id"]
            entry = self.autobids.get(autobid_id)
            if entry is None:
                number = _numeric_suffix("ab", autobid_id)
                entry = _AutobidEntry(
                    id=autobid_id,
                    config=AutoBidConfig(
                        auction_id=payload["auction_id"],
                        owner=AgentId(payload["owner"], payload["owner_address"]),
                        max_amount=payload["max_amount"],
                        status=AutoBidStatus(payload["status"]),
                    ),
                    agent=self.platform.ams_register(f"autobid-{number}"),
                )
                self.autobids[autobid_id] = entry
                self._autobid_counter = max(self._autobid_counter, number)
            else:
                entry.config.max_amount = payload["max_amount"]
                entry.config.status = AutoBidStatus(payload["status"])
        elif kind is EventKind.AUTOBID_AT_MAX:
            self.autobids[payload["autobid_id"]].config.status = AutoBidStatus.AT_MAX
        elif kind is EventKind.AUTOBID_CANCELLED:
            self.autobids[payload["autobid_id"]].config.status = AutoBidStatus.CANCELLED
        elif kind is EventKind.CLOSED:
            auction = self.auctions[payload["auction_id"]]
            auction.state = AuctionState.CLOSED
            auction.outcome = AuctionOutcome(
                auction_id=auction.id,
                winner=payload["winner"],
                winning_amount=payload["amount"],
                closed_at=payload["closed_at"],
            )
        elif kind is EventKind.RECORD_ADDED:
            self.warehouse.add_record(
                ClosedAuctionRecord(
                    site=payload["site"],
                    item_name=payload["item_name"],
                    category=payload["category"],
                    closed_price=payload["closed_price"],
                    num_bids=payload["num_bids"],
                    close_time=payload["close_time"],
                    quantity=payload["quantity"],
                    item_code=payload.get("item_code"),
                )
            )
        # BID_REJECTED and ADVICE_SERVED change no state.


def _numeric_suffix(prefix: str, identifier: str) -> int:
    match = re.fullmatch(re.escape(prefix) + r"(\d+)", identifier)
    return int(match.group(1)) if match else 0
