"""Deterministic marketplace simulation and brute-force duel oracle.

A scenario is a fully scripted marketplace: auctions, live bidders with
timed bids, and auto-bid actors with join times and an at-max policy.
run_scenario advances an integer logical clock one second at a time; the
same spec always yields the same transcript, line for line.

Per tick the order is fixed: auctions tick (declaration order), then
scripted actions due at that instant (declaration order), then auto-bids
react in creation order, repeatedly, until no agent wants to act. Agent
reactions have zero latency: a whole proxy-bid war happens inside one
tick, which is what makes golden-file transcripts stable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional, Union

from . import autobid, engine
from .acl import AgentId
from .autobid import AutoBidConfig, AutoBidStatus, DecisionKind
from .engine import Auction, BidOrigin, Money

HOLD = "hold"
CANCEL = "cancel"
RAISE = "raise"


class SimError(Exception):
    """Base class for simulation errors."""


class InvalidScenario(SimError):
    pass


class InvalidParams(SimError):
    pass


@dataclass(frozen=True)
class AuctionSpec:
    id: str
    item_name: str
    seller: str
    start_price: Money
    increment: Money
    open_time: int
    duration: int
    category: str = ""


@dataclass(frozen=True)
class LiveActorSpec:
    name: str
    auction_id: str
    bids: tuple[tuple[int, Money], ...]  # (time, amount)


@dataclass(frozen=True)
class AutoActorSpec:
    name: str
    auction_id: str
    max_amount: Money
    join_time: int
    at_max: str = HOLD  # HOLD | CANCEL | RAISE; RAISE fires once
    raise_to: Optional[Money] = None


ActorSpec = Union[LiveActorSpec, AutoActorSpec]


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int
    horizon: int
    auctions: tuple[AuctionSpec, ...]
    actors: tuple[ActorSpec, ...]


@dataclass
class Transcript:
    entries: list[dict] = field(default_factory=list)

    def add(self, time: int, kind: str, auction_id: str, detail: dict) -> None:
        self.entries.append(
            {"time": time, "kind": kind, "auction_id": auction_id, "detail": detail}
        )

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(entry, sort_keys=False) for entry in self.entries)

    def outcome(self, auction_id: str) -> tuple[Optional[str], Optional[Money]]:
        for entry in self.entries:
            if entry["kind"] == "closed" and entry["auction_id"] == auction_id:
                return entry["detail"]["winner"], entry["detail"]["amount"]
        raise InvalidScenario(f"auction {auction_id} never closed")


@dataclass
class _AutoRuntime:
    spec: AutoActorSpec
    config: AutoBidConfig
    raised: bool = False


class _Sim:
    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.transcript = Transcript()
        self.auctions: dict[str, Auction] = {}
        self.autobids: list[_AutoRuntime] = []
        for aspec in spec.auctions:
            if aspec.id in self.auctions:
                raise InvalidScenario(f"duplicate auction id {aspec.id}")
            self.auctions[aspec.id] = engine.open_auction(
                item_name=aspec.item_name,
                category=aspec.category,
                seller=aspec.seller,
                start_price=aspec.start_price,
                increment=aspec.increment,
                open_time=aspec.open_time,
                duration=aspec.duration,
                auction_id=aspec.id,
            )
        for actor in spec.actors:
            if actor.auction_id not in self.auctions:
                raise InvalidScenario(f"actor {actor.name} names unknown auction {actor.auction_id}")
            times = [t for t, _ in actor.bids] if isinstance(actor, LiveActorSpec) else [actor.join_time]
            if any(t > spec.horizon for t in times):
                raise InvalidScenario(f"actor {actor.name} scripted beyond horizon")
            if isinstance(actor, AutoActorSpec):
                if actor.at_max not in (HOLD, CANCEL, RAISE):
                    raise InvalidScenario(f"unknown at-max policy {actor.at_max!r}")
                if actor.at_max == RAISE and actor.raise_to is None:
                    raise InvalidScenario(f"actor {actor.name} raises without raise_to")

    def run(self) -> Transcript:
        for now in range(0, self.spec.horizon + 1):
            self._tick_auctions(now)
            self._scripted_actions(now)
            self._cascade(now)
        still_open = [a.id for a in self.auctions.values() if a.state is engine.AuctionState.OPEN]
        if still_open:
            raise InvalidScenario(f"open at horizon: {', '.join(still_open)}")
        return self.transcript

    def _record_engine_events(self, now: int, events: list[engine.EngineEvent]) -> None:
        for event in events:
            if isinstance(event, engine.EnteredFinalMinute):
                self.transcript.add(now, "final-minute", event.auction_id, {"close_time": event.close_time})
            elif isinstance(event, engine.Extended):
                self.transcript.add(now, "extended", event.auction_id, {"new_close_time": event.new_close_time})
            elif isinstance(event, engine.Closed):
                outcome = event.outcome
                self.transcript.add(
                    now,
                    "closed",
                    outcome.auction_id,
                    {
                        "winner": outcome.winner,
                        "amount": outcome.winning_amount,
                        "closed_at": outcome.closed_at,
                    },
                )

    def _tick_auctions(self, now: int) -> None:
        for aspec in self.spec.auctions:
            self._record_engine_events(now, engine.tick(self.auctions[aspec.id], now))

    def _place(self, now: int, auction: Auction, bidder: str, amount: Money, origin: BidOrigin) -> bool:
        try:
            _, events = engine.place_bid(auction, bidder, amount, now, origin=origin)
        except engine.BidTooLow as exc:
            self.transcript.add(
                now,
                "rejected",
                auction.id,
                {"bidder": bidder, "amount": amount, "reason": "bid-too-low", "required_minimum": exc.required_minimum},
            )
            return False
        except engine.AuctionClosed:
            self.transcript.add(
                now, "rejected", auction.id, {"bidder": bidder, "amount": amount, "reason": "closed"}
            )
            return False
        except engine.SelfOutbid:
            self.transcript.add(
                now, "rejected", auction.id, {"bidder": bidder, "amount": amount, "reason": "self-outbid"}
            )
            return False
        self.transcript.add(
            now,
            "bid",
            auction.id,
            {"bidder": bidder, "amount": amount, "origin": origin.value},
        )
        self._record_engine_events(now, events)
        return True

    def _scripted_actions(self, now: int) -> None:
        for actor in self.spec.actors:
            auction = self.auctions[actor.auction_id]
            if isinstance(actor, LiveActorSpec):
                for time, amount in actor.bids:
                    if time == now:
                        self._place(now, auction, actor.name, amount, BidOrigin.LIVE)
            elif actor.join_time == now:
                self._join_autobid(now, actor, auction)

    def _join_autobid(self, now: int, actor: AutoActorSpec, auction: Auction) -> None:
        config = AutoBidConfig(
            auction_id=actor.auction_id,
            owner=AgentId(actor.name, "sim"),
            max_amount=actor.max_amount,
        )
        runtime = _AutoRuntime(spec=actor, config=config)
        try:
            decision = autobid.create_autobid(config, auction)
        except engine.AuctionClosed:
            self.transcript.add(
                now, "rejected", auction.id, {"bidder": actor.name, "amount": actor.max_amount, "reason": "closed"}
            )
            return
        except autobid.MaxBelowStart:
            self.transcript.add(
                now,
                "rejected",
                auction.id,
                {"bidder": actor.name, "amount": actor.max_amount, "reason": "max-below-start"},
            )
            return
        self.autobids.append(runtime)
        self.transcript.add(now, "auto-joined", auction.id, {"bidder": actor.name, "max": actor.max_amount})
        self._apply_decision(now, runtime, auction, decision)

    def _apply_decision(
        self, now: int, runtime: _AutoRuntime, auction: Auction, decision: autobid.AutoBidDecision
    ) -> None:
        if decision.kind is DecisionKind.REBID:
            assert decision.amount is not None
            self._place(now, auction, runtime.spec.name, decision.amount, BidOrigin.AUTO)
        elif decision.kind is DecisionKind.AWAIT_OWNER:
            self.transcript.add(
                now, "at-max", auction.id, {"bidder": runtime.spec.name, "max": runtime.config.max_amount}
            )
            self._owner_reaction(now, runtime, auction)

    def _owner_reaction(self, now: int, runtime: _AutoRuntime, auction: Auction) -> None:
        policy = runtime.spec.at_max
        if policy == CANCEL:
            autobid.cancel(runtime.config)
            self.transcript.add(now, "cancelled", auction.id, {"bidder": runtime.spec.name})
        elif policy == RAISE and not runtime.raised:
            runtime.raised = True
            assert runtime.spec.raise_to is not None
            decision = autobid.raise_max(runtime.config, auction, runtime.spec.raise_to)
            self.transcript.add(
                now, "raised", auction.id, {"bidder": runtime.spec.name, "new_max": runtime.spec.raise_to}
            )
            self._apply_decision(now, runtime, auction, decision)

    def _cascade(self, now: int) -> None:
        # Zero-latency reactions: loop until no auto-bid makes a move.
        progress = True
        while progress:
            progress = False
            for runtime in self.autobids:
                if runtime.config.status is not AutoBidStatus.ACTIVE:
                    continue
                auction = self.auctions[runtime.config.auction_id]
                if auction.state is engine.AuctionState.CLOSED:
                    continue
                top = engine.winning_bid(auction)
                if top is None or top.bidder == runtime.spec.name:
                    continue
                before = len(self.transcript.entries)
                decision = autobid.on_outbid(runtime.config, auction, top.amount)
                self._apply_decision(now, runtime, auction, decision)
                if len(self.transcript.entries) > before:
                    progress = True


def run_scenario(spec: ScenarioSpec) -> Transcript:
    """Run to the horizon; every auction must close or the scenario is invalid."""
    return _Sim(spec).run()


# ---------------------------------------------------------------------------
# Duel oracle: two proxies, strict alternation of minimum raises.


def oracle_duel(max_a: Money, max_b: Money, increment: Money, start: Money) -> tuple[str, Money]:
    """Winner and price with A opening at start and B challenging.

    Each challenger rebids current + increment while that stays within
    its maximum; the first one priced out loses at the standing amount.
    """
    if start < 0 or increment < 1:
        raise InvalidParams(f"bad start/increment ({start}, {increment})")
    if max_a < start or max_b < start:
        raise InvalidParams("both maxima must reach the start price")
    current = start
    winner = "A"
    challenger = "B"
    while True:
        limit = max_b if challenger == "B" else max_a
        if current + increment > limit:
            return winner, current
        current += increment
        winner, challenger = challenger, winner


def duel_scenario(max_a: Money, max_b: Money, increment: Money, start: Money) -> ScenarioSpec:
    """Agent-based twin of oracle_duel: A joins first, both at t=0."""
    duration = 3600
    return ScenarioSpec(
        seed=0,
        horizon=duration + 60,
        auctions=(
            AuctionSpec(
                id="duel",
                item_name="duel item",
                seller="seller",
                start_price=start,
                increment=increment,
                open_time=0,
                duration=duration,
            ),
        ),
        actors=(
            AutoActorSpec(name="A", auction_id="duel", max_amount=max_a, join_time=0),
            AutoActorSpec(name="B", auction_id="duel", max_amount=max_b, join_time=0),
        ),
    )


def agent_duel(max_a: Money, max_b: Money, increment: Money, start: Money) -> tuple[str, Money]:
    transcript = run_scenario(duel_scenario(max_a, max_b, increment, start))
    winner, amount = transcript.outcome("duel")
    if winner is None or amount is None:
        raise InvalidScenario("duel closed without a winner")
    return winner, amount


@dataclass(frozen=True)
class DuelReport:
    points: int
    mismatches: tuple[tuple[Money, Money, Money, Money], ...]


def fuzz_duels(grid) -> DuelReport:
    """Agent path vs oracle over (maxA, maxB, increment, start) points."""
    points = 0
    mismatches = []
    for max_a, max_b, increment, start in grid:
        points += 1
        if agent_duel(max_a, max_b, increment, start) != oracle_duel(max_a, max_b, increment, start):
            mismatches.append((max_a, max_b, increment, start))
    return DuelReport(points=points, mismatches=tuple(mismatches))


# ---------------------------------------------------------------------------
# Scenario files and random populations.


def _actor_from_dict(raw: dict) -> ActorSpec:
    kind = raw.get("kind")
    if kind == "live":
        return LiveActorSpec(
            name=raw["name"],
            auction_id=raw["auction_id"],
            bids=tuple((int(t), int(a)) for t, a in raw["bids"]),
        )
    if kind == "auto":
        return AutoActorSpec(
            name=raw["name"],
            auction_id=raw["auction_id"],
            max_amount=int(raw["max_amount"]),
            join_time=int(raw["join_time"]),
            at_max=raw.get("at_max", HOLD),
            raise_to=int(raw["raise_to"]) if "raise_to" in raw else None,
        )
    raise InvalidScenario(f"unknown actor kind {kind!r}")


def load_scenario(text: str) -> ScenarioSpec:
    """Scenario from its JSON form (see fixtures for the shape)."""
    try:
        raw = json.loads(text)
        return ScenarioSpec(
            seed=int(raw.get("seed", 0)),
            horizon=int(raw["horizon"]),
            auctions=tuple(
                AuctionSpec(
                    id=a["id"],
                    item_name=a["item_name"],
                    seller=a.get("seller", "seller"),
                    start_price=int(a["start_price"]),
                    increment=int(a["increment"]),
                    open_time=int(a.get("open_time", 0)),
                    duration=int(a["duration"]),
                    category=a.get("category", ""),
                )
                for a in raw["auctions"]
            ),
            actors=tuple(_actor_from_dict(actor) for actor in raw["actors"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InvalidScenario(f"bad scenario document: {exc}") from exc


def generate_random_scenario(seed: int, num_auctions: int = 2, actors_per_auction: int = 3) -> ScenarioSpec:
    """Randomized but fully scripted population; same seed, same scenario."""
    rng = random.Random(seed)
    auctions = []
    actors: list[ActorSpec] = []
    for i in range(num_auctions):
        start = rng.randrange(10, 100)
        increment = rng.randrange(1, 10)
        duration = rng.randrange(300, 600)
        auction_id = f"a{i + 1}"
        auctions.append(
            AuctionSpec(
                id=auction_id,
                item_name=f"item {i + 1}",
                seller="seller",
                start_price=start,
                increment=increment,
                open_time=0,
                duration=duration,
            )
        )
        for j in range(actors_per_auction):
            name = f"{auction_id}-actor{j + 1}"
            if rng.random() < 0.5:
                bids = tuple(
                    sorted(
                        (rng.randrange(0, duration - 90), start + rng.randrange(0, 120))
                        for _ in range(rng.randrange(1, 4))
                    )
                )
                actors.append(LiveActorSpec(name=name, auction_id=auction_id, bids=bids))
            else:
                max_amount = start + rng.randrange(10, 150)
                policy = rng.choice((HOLD, CANCEL, RAISE))
                actors.append(
                    AutoActorSpec(
                        name=name,
                        auction_id=auction_id,
                        max_amount=max_amount,
                        join_time=rng.randrange(0, duration - 90),
                        at_max=policy,
                        raise_to=max_amount + rng.randrange(20, 80) if policy == RAISE else None,
                    )
                )
    # All scripted activity lands at least 90s before close, outside the
    # final minute, so nothing can extend and a small slack suffices.
    horizon = max(a.open_time + a.duration for a in auctions) + 120
    return ScenarioSpec(seed=seed, horizon=horizon, auctions=tuple(auctions), actors=tuple(actors))
