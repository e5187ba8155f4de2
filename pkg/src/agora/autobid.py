"""Proxy bidding: keep the owner winning up to a stated maximum.

An auto-bid rebids the minimum necessary raise (current plus increment)
whenever someone else takes the lead. When that raise would exceed the
owner's maximum the auto-bid pauses AT_MAX and waits for the owner, who
has exactly two options: raise the maximum or cancel.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .acl import AgentId
from .engine import Auction, AuctionClosed, AuctionState, Money, required_minimum, winning_bid


class AutobidError(Exception):
    """Base class for auto-bid errors."""


class InactiveAutobid(AutobidError):
    pass


class MaxBelowStart(AutobidError):
    pass


class NotAnIncrease(AutobidError):
    pass


class AutoBidStatus(Enum):
    ACTIVE = "active"
    AT_MAX = "at-max"
    CANCELLED = "cancelled"


class DecisionKind(Enum):
    REBID = "rebid"
    AWAIT_OWNER = "await-owner"
    NO_ACTION = "no-action"


@dataclass(frozen=True)
class AutoBidDecision:
    kind: DecisionKind
    amount: Optional[Money] = None


def rebid(amount: Money) -> AutoBidDecision:
    return AutoBidDecision(DecisionKind.REBID, amount)


AWAIT_OWNER = AutoBidDecision(DecisionKind.AWAIT_OWNER)
NO_ACTION = AutoBidDecision(DecisionKind.NO_ACTION)


@dataclass
class AutoBidConfig:
    auction_id: str
    owner: AgentId
    max_amount: Money
    status: AutoBidStatus = AutoBidStatus.ACTIVE


def _owner_winning(config: AutoBidConfig, auction: Auction) -> bool:
    top = winning_bid(auction)
    return top is not None and top.bidder == config.owner.name


def _evaluate(config: AutoBidConfig, auction: Auction) -> AutoBidDecision:
    # Shared step rule: bid the minimum necessary or pause at the ceiling.
    if _owner_winning(config, auction):
        return NO_ACTION
    minimum = required_minimum(auction)
    if minimum <= config.max_amount:
        return rebid(minimum)
    config.status = AutoBidStatus.AT_MAX
    return AWAIT_OWNER


def create_autobid(config: AutoBidConfig, auction: Auction) -> AutoBidDecision:
    """Initial decision when an auto-bid is attached to an open auction."""
    if auction.state is AuctionState.CLOSED:
        raise AuctionClosed(f"auction {auction.id} is closed")
    if config.max_amount < auction.start_price:
        raise MaxBelowStart(
            f"max {config.max_amount} is below start price {auction.start_price}"
        )
    return _evaluate(config, auction)


def on_outbid(config: AutoBidConfig, auction: Auction, new_current: Money) -> AutoBidDecision:
    """React to losing the lead at `new_current`."""
    if config.status is not AutoBidStatus.ACTIVE:
        raise InactiveAutobid(f"auto-bid is {config.status.value}")
    if _owner_winning(config, auction):
        return NO_ACTION
    amount = new_current + auction.increment
    if amount <= config.max_amount:
        return rebid(amount)
    config.status = AutoBidStatus.AT_MAX
    return AWAIT_OWNER


def raise_max(config: AutoBidConfig, auction: Auction, new_max: Money) -> AutoBidDecision:
    """Owner raises the ceiling; re-evaluates against the current price."""
    if config.status is AutoBidStatus.CANCELLED:
        raise InactiveAutobid("auto-bid is cancelled")
    if new_max <= config.max_amount:
        raise NotAnIncrease(f"new max {new_max} does not exceed {config.max_amount}")
    config.max_amount = new_max
    config.status = AutoBidStatus.ACTIVE
    return _evaluate(config, auction)


def cancel(config: AutoBidConfig) -> None:
    """Terminal: no further reactions; placed bids remain binding."""
    if config.status is AutoBidStatus.CANCELLED:
        raise InactiveAutobid("auto-bid already cancelled")
    config.status = AutoBidStatus.CANCELLED
