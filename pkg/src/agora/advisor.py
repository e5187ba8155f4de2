"""Rule-based bidding advice from closed-auction history.

Three rules, applied to recent records matching the item:

    recommended_bid      = median closed price
    recommended_bid_time = close_time - 5 minutes
    should_bid           = the auction's bid count is still below the
                           median bid count of comparable auctions

"Recent" means within a lookback window (default 90 days); fewer than
min_history matching records is a refusal, not a guess. The advisor is
an ordinary platform agent: it serves advice over the request protocol
and registers under the "bid-advice" service type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .acl import AclMessage, AgentId, AgentPlatform, Performative, ServiceDescription
from .ingest import (
    AdviceRequest,
    MalformedDocument,
    parse_advice_request,
    serialize_advice_response,
)
from .warehouse import (
    DEFAULT_MIN_HISTORY,
    InsufficientHistory,
    Money,
    Timestamp,
    Warehouse,
    floored_median,
)

DEFAULT_LOOKBACK_DAYS = 90
BID_TIME_LEAD = 300  # recommend bidding five minutes before close, seconds

SERVICE_TYPE = "bid-advice"

__all__ = [
    "AdviceBasis",
    "AdviceRequest",
    "AdviceResponse",
    "AdvisorAgent",
    "advise",
    "recommended_bid_time",
    "recommended_max_bid",
    "should_bid",
]


@dataclass(frozen=True)
class AdviceBasis:
    sample_size: int
    median_closed_price: Money
    median_num_bids: int


@dataclass(frozen=True)
class AdviceResponse:
    recommended_bid: Money
    recommended_bid_time: Timestamp
    should_bid: bool
    basis: AdviceBasis


def _matching(
    warehouse: Warehouse,
    item_name: str,
    now: Optional[Timestamp],
    lookback_days: int,
    min_history: int,
):
    since = None if now is None else now - lookback_days * 86400
    matches = warehouse.records_matching(item_name, since=since, min_history=min_history)
    if len(matches) < min_history:
        raise InsufficientHistory(
            f"{len(matches)} recent records for {item_name!r}, need {min_history}",
            sample_size=len(matches),
        )
    return matches


def recommended_max_bid(
    item_name: str,
    warehouse: Warehouse,
    now: Optional[Timestamp] = None,
    lookback_days: int = DEFAULT_LOOKBACK_DAYS,
    min_history: int = DEFAULT_MIN_HISTORY,
) -> Money:
    """Median closed price of recent matching records. now=None: no recency cut."""
    matches = _matching(warehouse, item_name, now, lookback_days, min_history)
    return floored_median([r.closed_price for r in matches])


def recommended_bid_time(close_time: Timestamp) -> Timestamp:
    return close_time - BID_TIME_LEAD


def should_bid(
    num_bids: int,
    item_name: str,
    warehouse: Warehouse,
    now: Optional[Timestamp] = None,
    lookback_days: int = DEFAULT_LOOKBACK_DAYS,
    min_history: int = DEFAULT_MIN_HISTORY,
) -> bool:
    """True while the auction has drawn strictly fewer bids than is typical."""
    matches = _matching(warehouse, item_name, now, lookback_days, min_history)
    return num_bids < floored_median([r.num_bids for r in matches])


def advise(
    req: AdviceRequest,
    warehouse: Warehouse,
    now: Timestamp,
    lookback_days: int = DEFAULT_LOOKBACK_DAYS,
    min_history: int = DEFAULT_MIN_HISTORY,
) -> AdviceResponse:
    """All three rules against one matching set; one InsufficientHistory for all."""
    matches = _matching(warehouse, req.item_name, now, lookback_days, min_history)
    basis = AdviceBasis(
        sample_size=len(matches),
        median_closed_price=floored_median([r.closed_price for r in matches]),
        median_num_bids=floored_median([r.num_bids for r in matches]),
    )
    close_time = now + req.remaining_duration
    return AdviceResponse(
        recommended_bid=basis.median_closed_price,
        recommended_bid_time=recommended_bid_time(close_time),
        should_bid=req.num_bids < basis.median_num_bids,
        basis=basis,
    )


class AdvisorAgent:
    """Advice service bound to a platform: request in, advice-response XML out.

    Replies follow the request-protocol grammar: REFUSE when history is
    too thin (refusal known before any work), AGREE then INFORM with the
    response document on success, AGREE then FAILURE when the request
    content is not a usable advice-request document.
    """

    def __init__(
        self,
        platform: AgentPlatform,
        warehouse: Warehouse,
        clock: Callable[[], Timestamp],
        name: str = "advisor",
        lookback_days: int = DEFAULT_LOOKBACK_DAYS,
        min_history: int = DEFAULT_MIN_HISTORY,
    ):
        self.warehouse = warehouse
        self.clock = clock
        self.lookback_days = lookback_days
        self.min_history = min_history
        self.aid: AgentId = platform.ams_register(name)
        platform.df_register(ServiceDescription(self.aid, SERVICE_TYPE, "recommended-bid"))
        platform.set_request_handler(self.aid, self.handle_advice_message)

    def handle_advice_message(self, msg: AclMessage) -> Iterator[tuple[Performative, str]]:
        try:
            req = parse_advice_request(msg.content)
        except MalformedDocument as exc:
            yield Performative.AGREE, ""
            yield Performative.FAILURE, f"malformed advice request: {exc}"
            return
        try:
            response = advise(
                req,
                self.warehouse,
                now=self.clock(),
                lookback_days=self.lookback_days,
                min_history=self.min_history,
            )
        except InsufficientHistory as exc:
            yield Performative.REFUSE, f"insufficient history: sample-size={exc.sample_size}"
            return
        yield Performative.AGREE, ""
        yield Performative.INFORM, serialize_advice_response(
            response.recommended_bid,
            response.recommended_bid_time,
            response.should_bid,
            response.basis.sample_size,
        )
