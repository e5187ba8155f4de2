"""English-auction state machine with an anti-sniping closing rule.

Open ascending-price auctions: the first bid must meet the start price,
every later bid must raise the standing amount by at least the increment,
and the highest accepted bid at close wins. Any bid landing in the final
minute pushes the close out by another minute, repeatedly, so the auction
only ends after a quiet final minute.

Time is an injected logical clock (integer seconds); the engine never
reads the wall clock, which keeps every run replayable.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

Money = int
Timestamp = int

FINAL_MINUTE = 60  # window before close that triggers extension, seconds
EXTENSION = 60     # how far each in-window bid pushes the close, seconds


class EngineError(Exception):
    """Base class for auction-engine errors."""


class InvalidSpec(EngineError):
    pass


class AuctionClosed(EngineError):
    pass


class BidTooLow(EngineError):
    def __init__(self, required_minimum: Money):
        super().__init__(f"bid below required minimum {required_minimum}")
        self.required_minimum = required_minimum


class SelfOutbid(EngineError):
    pass


class AuctionState(Enum):
    OPEN = "open"
    CLOSED = "closed"


class BidOrigin(Enum):
    LIVE = "live"
    AUTO = "auto"


@dataclass(frozen=True)
class Bid:
    auction_id: str
    bidder: str
    amount: Money
    timestamp: Timestamp
    origin: BidOrigin = BidOrigin.LIVE


@dataclass(frozen=True)
class AuctionOutcome:
    auction_id: str
    winner: Optional[str]
    winning_amount: Optional[Money]
    closed_at: Timestamp


@dataclass
class Auction:
    """One English auction. Mutated only through the module's operations."""

    id: str
    item_name: str
    category: str
    seller: str
    start_price: Money
    increment: Money
    open_time: Timestamp
    close_time: Timestamp
    state: AuctionState = AuctionState.OPEN
    bids: list[Bid] = field(default_factory=list)
    outcome: Optional[AuctionOutcome] = None
    # Re-armed after every extension so each final-minute window is announced.
    final_minute_announced: bool = False


@dataclass(frozen=True)
class EnteredFinalMinute:
    auction_id: str
    close_time: Timestamp


@dataclass(frozen=True)
class Extended:
    auction_id: str
    new_close_time: Timestamp


@dataclass(frozen=True)
class Closed:
    outcome: AuctionOutcome


EngineEvent = Union[EnteredFinalMinute, Extended, Closed]


def open_auction(
    item_name: str,
    category: str,
    seller: str,
    start_price: Money,
    increment: Money,
    open_time: Timestamp,
    duration: int,
    auction_id: Optional[str] = None,
) -> Auction:
    """Create an OPEN auction closing `duration` seconds after `open_time`."""
    if duration <= 0:
        raise InvalidSpec(f"duration must be positive, got {duration}")
    if increment < 1:
        raise InvalidSpec(f"increment must be at least 1, got {increment}")
    if start_price < 0:
        raise InvalidSpec(f"start price must be non-negative, got {start_price}")
    if not item_name:
        raise InvalidSpec("item name must not be empty")
    return Auction(
        id=auction_id if auction_id is not None else f"auc-{uuid.uuid4().hex[:10]}",
        item_name=item_name,
        category=category,
        seller=seller,
        start_price=start_price,
        increment=increment,
        open_time=open_time,
        close_time=open_time + duration,
    )


def winning_bid(auction: Auction) -> Optional[Bid]:
    """Accepted bid with the highest amount, earliest timestamp on ties."""
    if not auction.bids:
        return None
    return max(auction.bids, key=lambda b: (b.amount, -b.timestamp))


def current_amount(auction: Auction) -> Optional[Money]:
    top = winning_bid(auction)
    return top.amount if top else None


def required_minimum(auction: Auction) -> Money:
    """Smallest amount the next bid must reach."""
    top = winning_bid(auction)
    return auction.start_price if top is None else top.amount + auction.increment


def place_bid(
    auction: Auction,
    bidder: str,
    amount: Money,
    now: Timestamp,
    origin: BidOrigin = BidOrigin.LIVE,
) -> tuple[Bid, list[EngineEvent]]:
    """Validate and append a bid; returns it plus any extension event.

    Acceptance rule: the first bid must reach start_price, later bids must
    reach the standing amount plus the increment. A bid arriving at or
    after close_time - 60s moves close_time out by 60s.
    """
    if auction.state is AuctionState.CLOSED or now >= auction.close_time:
        raise AuctionClosed(f"auction {auction.id} is closed")
    if now < auction.open_time:
        raise AuctionClosed(f"auction {auction.id} does not open until {auction.open_time}")
    top = winning_bid(auction)
    if top is not None and top.bidder == bidder and amount <= top.amount:
        raise SelfOutbid(f"{bidder} already holds the winning bid at {top.amount}")
    minimum = required_minimum(auction)
    if amount < minimum:
        raise BidTooLow(minimum)

    bid = Bid(auction_id=auction.id, bidder=bidder, amount=amount, timestamp=now, origin=origin)
    auction.bids.append(bid)

    events: list[EngineEvent] = []
    if now >= auction.close_time - FINAL_MINUTE:
        auction.close_time += EXTENSION
        auction.final_minute_announced = False
        events.append(Extended(auction_id=auction.id, new_close_time=auction.close_time))
    return bid, events


def tick(auction: Auction, now: Timestamp) -> list[EngineEvent]:
    """Advance the auction to `now`; idempotent for a repeated instant.

    Emits EnteredFinalMinute once per close_time value when the window is
    first reached, and Closed (with the outcome) once the close time
    passes. The recorded closing instant is the close_time in force, even
    when the tick itself runs later.
    """
    events: list[EngineEvent] = []
    if auction.state is AuctionState.CLOSED:
        return events
    if not auction.final_minute_announced and now >= auction.close_time - FINAL_MINUTE:
        auction.final_minute_announced = True
        events.append(EnteredFinalMinute(auction_id=auction.id, close_time=auction.close_time))
    if now >= auction.close_time:
        top = winning_bid(auction)
        auction.state = AuctionState.CLOSED
        auction.outcome = AuctionOutcome(
            auction_id=auction.id,
            winner=top.bidder if top else None,
            winning_amount=top.amount if top else None,
            closed_at=auction.close_time,
        )
        events.append(Closed(outcome=auction.outcome))
    return events
