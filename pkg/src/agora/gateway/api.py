"""HTTP API and server-sent event stream over an AuctionService.

Write endpoints need a bearer token from POST /session. Domain errors
map to stable JSON bodies: {"error": <slug>, "detail": <message>} plus
error-specific fields (a rejected bid carries required_minimum, a
refused advice request carries sample_size).

GET /events is text/event-stream; each frame is

    id: <sequence>
    event: <kind>
    data: {"sequence":..,"time":..,"kind":..,"payload":{..}}

Resume with ?since=N or a Last-Event-ID header; ?follow=0 stops after
the backlog instead of staying open (handy for scripted readers).
"""

from __future__ import annotations

import json
from typing import Iterator, Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from ..acl import AgentId
from ..autobid import AutobidError, InactiveAutobid, MaxBelowStart, NotAnIncrease
from ..engine import AuctionClosed, BidTooLow, InvalidSpec, SelfOutbid
from ..warehouse import InsufficientHistory, NoData
from .events import Event
from .service import (
    AdvisorRefused,
    AuctionService,
    GatewayError,
    NoAdvisor,
    NotOwner,
    UnknownAuction,
    UnknownAutobid,
)


class SessionBody(BaseModel):
    name: str = Field(min_length=1, max_length=80)


class OpenAuctionBody(BaseModel):
    item_name: str = Field(min_length=1)
    start_price: int = Field(ge=0)
    increment: int = Field(ge=1)
    duration: int = Field(ge=1)
    category: str = ""


class BidBody(BaseModel):
    amount: int


class AutobidBody(BaseModel):
    auction_id: str
    max_amount: int


class RaiseBody(BaseModel):
    new_max: int


def _error_response(status: int, slug: str, exc: Exception, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": slug, "detail": str(exc), **extra})


def _sse_frame(event: Event) -> str:
    data = json.dumps(
        {"sequence": event.sequence, "time": event.time, "kind": event.kind.value, "payload": event.payload}
    )
    return f"id: {event.sequence}\nevent: {event.kind.value}\ndata: {data}\n\n"


def create_app(service: AuctionService) -> FastAPI:
    app = FastAPI(title="auction gateway", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def require_session(authorization: Optional[str] = Header(None)) -> AgentId:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        agent = service.session(authorization[len("Bearer ") :].strip())
        if agent is None:
            raise HTTPException(status_code=401, detail="unknown session token")
        return agent

    # One handler per status family keeps the mapping in one place.
    _CONFLICTS = (AuctionClosed, SelfOutbid, MaxBelowStart, NotAnIncrease, InactiveAutobid)

    @app.exception_handler(BidTooLow)
    async def _bid_too_low(_, exc: BidTooLow):
        return _error_response(409, "bid-too-low", exc, required_minimum=exc.required_minimum)

    @app.exception_handler(AdvisorRefused)
    async def _advisor_refused(_, exc: AdvisorRefused):
        return _error_response(409, "insufficient-history", exc, sample_size=exc.sample_size)

    for conflict in _CONFLICTS:

        @app.exception_handler(conflict)
        async def _conflict(_, exc: Exception):
            slug = {
                AuctionClosed: "auction-closed",
                SelfOutbid: "self-outbid",
                MaxBelowStart: "max-below-start",
                NotAnIncrease: "not-an-increase",
                InactiveAutobid: "inactive-autobid",
            }[type(exc)]
            return _error_response(409, slug, exc)

    @app.exception_handler(UnknownAuction)
    async def _unknown_auction(_, exc):
        return _error_response(404, "unknown-auction", exc)

    @app.exception_handler(UnknownAutobid)
    async def _unknown_autobid(_, exc):
        return _error_response(404, "unknown-autobid", exc)

    @app.exception_handler(NoData)
    async def _no_data(_, exc):
        return _error_response(404, "no-data", exc)

    @app.exception_handler(InsufficientHistory)
    async def _insufficient(_, exc: InsufficientHistory):
        return _error_response(404, "insufficient-history", exc, sample_size=exc.sample_size)

    @app.exception_handler(NotOwner)
    async def _not_owner(_, exc):
        return _error_response(403, "not-owner", exc)

    @app.exception_handler(NoAdvisor)
    async def _no_advisor(_, exc):
        return _error_response(503, "no-advisor", exc)

    @app.exception_handler(InvalidSpec)
    async def _invalid_spec(_, exc):
        return _error_response(422, "invalid-auction", exc)

    @app.exception_handler(GatewayError)
    async def _gateway_error(_, exc):
        return _error_response(500, "gateway-error", exc)

    @app.post("/session")
    def open_session(body: SessionBody):
        token, agent = service.register_session(body.name)
        return {"token": token, "name": agent.name, "address": agent.address}

    @app.get("/time")
    def server_time():
        return {"now": service.now()}

    @app.get("/auctions")
    def list_auctions():
        return {"auctions": service.list_auctions(), "now": service.now()}

    @app.post("/auctions", status_code=201)
    def open_auction(body: OpenAuctionBody, agent: AgentId = Depends(require_session)):
        return service.open_auction(
            item_name=body.item_name,
            start_price=body.start_price,
            increment=body.increment,
            duration=body.duration,
            seller=agent.name,
            category=body.category,
        )

    @app.get("/auctions/{auction_id}")
    def auction_detail(auction_id: str):
        return service.auction_detail(auction_id)

    @app.post("/auctions/{auction_id}/bids")
    def place_bid(auction_id: str, body: BidBody, agent: AgentId = Depends(require_session)):
        return {"accepted": True, "auction": service.place_bid(auction_id, agent.name, body.amount)}

    @app.get("/auctions/{auction_id}/advice")
    def get_advice(auction_id: str, agent: AgentId = Depends(require_session)):
        return service.get_advice(auction_id, requester=agent)

    @app.post("/autobids", status_code=201)
    def create_autobid(body: AutobidBody, agent: AgentId = Depends(require_session)):
        return service.create_autobid(body.auction_id, owner=agent, max_amount=body.max_amount)

    @app.get("/autobids")
    def my_autobids(agent: AgentId = Depends(require_session)):
        return {"autobids": service.autobids_for(agent.name)}

    @app.post("/autobids/{autobid_id}/raise")
    def raise_max(autobid_id: str, body: RaiseBody, agent: AgentId = Depends(require_session)):
        return service.raise_max(autobid_id, body.new_max, requester=agent)

    @app.post("/autobids/{autobid_id}/cancel")
    def cancel_autobid(autobid_id: str, agent: AgentId = Depends(require_session)):
        return service.cancel_autobid(autobid_id, requester=agent)

    @app.get("/reports/stats")
    def stats_report(item: str = Query(min_length=1)):
        return service.stats_report(item)

    @app.get("/reports/prediction")
    def prediction_report(item: str = Query(min_length=1), seed: Optional[int] = None):
        return service.prediction_report(item, seed=seed)

    @app.get("/events")
    def event_stream(
        request: Request,
        since: int = 0,
        follow: int = 1,
        last_event_id: Optional[str] = Header(None, alias="Last-Event-ID"),
    ):
        start = since
        if last_event_id is not None:
            try:
                start = int(last_event_id)
            except ValueError:
                raise HTTPException(status_code=400, detail="Last-Event-ID must be a sequence number")

        def frames(cursor: int) -> Iterator[str]:
            for event in service.events_since(cursor):
                cursor = event.sequence
                yield _sse_frame(event)
            if not follow:
                return
            while True:
                fresh = service.wait_for_events(cursor, timeout=1.0)
                if fresh:
                    for event in fresh:
                        cursor = event.sequence
                        yield _sse_frame(event)
                else:
                    yield ": keep-alive\n\n"

        return StreamingResponse(frames(start), media_type="text/event-stream")

    return app
