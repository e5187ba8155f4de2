"""Closed-auction store, statistics reports, and market prediction.

The warehouse keeps every closed auction as one record keyed by
(site, item_name, close_time). Reports reduce matching records to
min/median/max price figures; the prediction report perturbs two period
medians with a seeded random generator, following the formulas:

    variant1 = floor(past * r1) + present
    variant2 = (past + present) / 2
    future   = floor(variant2 + r2) + variant1

with r1, r2 uniform in [0, 1). All money is integer minor units; the
floors are evaluated in exact integer arithmetic so results never depend
on float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

Money = int
Timestamp = int

DEFAULT_MIN_HISTORY = 3  # fewer matching records than this triggers fallback / refusal


class WarehouseError(Exception):
    """Base class for warehouse errors."""


class InvalidRecord(WarehouseError):
    pass


class NoData(WarehouseError):
    pass


class InsufficientHistory(WarehouseError):
    def __init__(self, message: str, sample_size: int = 0):
        super().__init__(message)
        self.sample_size = sample_size


@dataclass(frozen=True)
class ClosedAuctionRecord:
    site: str
    item_name: str
    category: str
    closed_price: Money
    num_bids: int
    close_time: Timestamp
    quantity: int = 1
    item_code: Optional[str] = None

    def key(self) -> tuple[str, str, Timestamp]:
        return (self.site, self.item_name, self.close_time)


@dataclass(frozen=True)
class StatsReport:
    item_name: str
    min: Money
    median: Money
    max: Money
    quantity_sold: int
    sample_size: int


@dataclass(frozen=True)
class MarketPrediction:
    item_name: str
    past: Money
    present: Money
    variant1: Money
    variant2: float  # integer or an exact half unit
    future: Money
    seed: int


def floored_median(values: Sequence[int]) -> int:
    """Sorted middle value; even counts take the floored mean of the two middles."""
    if not values:
        raise ValueError("median of empty sample")
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) // 2


class Rng(Protocol):
    seed: int

    def next_units(self) -> int:
        """Next draw as an integer k in [0, 2**48); the real is k / 2**48."""
        ...


_A = 0x5DEECE66D
_C = 0xB
_MASK = (1 << 48) - 1


class SeededRng:
    """48-bit linear congruential generator.

    state(0) = (seed XOR 0x5DEECE66D) mod 2**48, then
    state(i+1) = (0x5DEECE66D * state(i) + 11) mod 2**48; each draw steps
    the state and returns it. random() maps a draw to [0, 1) by dividing
    by 2**48. Same seed, same sequence, on any platform.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self._state = (seed ^ _A) & _MASK

    def next_units(self) -> int:
        self._state = (_A * self._state + _C) & _MASK
        return self._state

    def random(self) -> float:
        return self.next_units() / float(1 << 48)


def predict(past: Money, present: Money, rng: Rng, item_name: str = "") -> MarketPrediction:
    """Apply the two-draw perturbation formulas to a pair of period medians.

    floor(past * r1) and floor(variant2 + r2) are computed on the raw
    48-bit draws: floor(past * k / 2**48) and
    floor(((past + present) * 2**47 + k) / 2**48).
    """
    if past < 0 or present < 0:
        raise ValueError("period medians must be non-negative")
    k1 = rng.next_units()
    k2 = rng.next_units()
    variant1 = (past * k1 >> 48) + present
    variant2 = (past + present) / 2
    future = (((past + present) << 47) + k2 >> 48) + variant1
    return MarketPrediction(
        item_name=item_name,
        past=past,
        present=present,
        variant1=variant1,
        variant2=variant2,
        future=future,
        seed=rng.seed,
    )


class Warehouse:
    """In-memory table of closed auctions with duplicate-key suppression."""

    def __init__(self):
        self._records: list[ClosedAuctionRecord] = []
        self._keys: set[tuple[str, str, Timestamp]] = set()
        self.duplicates = 0  # duplicate inserts ignored since creation

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> tuple[ClosedAuctionRecord, ...]:
        return tuple(self._records)

    def add_record(self, rec: ClosedAuctionRecord) -> bool:
        """Store one record; a repeat of an existing key is counted, not stored."""
        if rec.closed_price < 0:
            raise InvalidRecord(f"closed price must be non-negative, got {rec.closed_price}")
        if rec.num_bids < 0:
            raise InvalidRecord(f"bid count must be non-negative, got {rec.num_bids}")
        if rec.quantity < 1:
            raise InvalidRecord(f"quantity must be at least 1, got {rec.quantity}")
        if not rec.item_name or not rec.site:
            raise InvalidRecord("site and item name must not be empty")
        if rec.key() in self._keys:
            self.duplicates += 1
            return False
        self._keys.add(rec.key())
        self._records.append(rec)
        return True

    def records_matching(
        self,
        item_name: str,
        since: Optional[Timestamp] = None,
        min_history: int = DEFAULT_MIN_HISTORY,
    ) -> list[ClosedAuctionRecord]:
        """Exact-name matches, widened to whole categories when too few.

        Listings of one product rarely share one title across sites, so
        when exact matches fall below min_history the categories of those
        matches stand in for the name. No exact match means no category
        to widen into, so the result is empty.
        """
        pool = [r for r in self._records if since is None or r.close_time >= since]
        exact = [r for r in pool if r.item_name == item_name]
        if not exact or len(exact) >= min_history:
            return exact
        categories = {r.category for r in exact}
        return [r for r in pool if r.category in categories]

    def stats_report(self, item_name: str, min_history: int = DEFAULT_MIN_HISTORY) -> StatsReport:
        matches = self.records_matching(item_name, min_history=min_history)
        if not matches:
            raise NoData(f"no closed auctions match {item_name!r}")
        prices = [r.closed_price for r in matches]
        return StatsReport(
            item_name=item_name,
            min=min(prices),
            median=floored_median(prices),
            max=max(prices),
            quantity_sold=sum(r.quantity for r in matches),
            sample_size=len(matches),
        )

    def aggregate_periods(
        self,
        item_name: str,
        period_length: int,
        now: Timestamp,
        min_history: int = DEFAULT_MIN_HISTORY,
    ) -> tuple[Money, Money]:
        """Median price per period: [now-2L, now-L) and [now-L, now)."""
        if period_length <= 0:
            raise ValueError(f"period length must be positive, got {period_length}")
        matches = self.records_matching(item_name, min_history=min_history)
        past_window = [
            r.closed_price
            for r in matches
            if now - 2 * period_length <= r.close_time < now - period_length
        ]
        present_window = [
            r.closed_price for r in matches if now - period_length <= r.close_time < now
        ]
        if not past_window:
            raise InsufficientHistory("past")
        if not present_window:
            raise InsufficientHistory("present")
        return floored_median(past_window), floored_median(present_window)
