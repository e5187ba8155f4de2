"""Server tier: event-sourced service, HTTP API, event stream, config."""

from .config import Config, load_config
from .events import CorruptLog, Event, EventKind, EventLog, read_log
from .service import (
    AdvisorRefused,
    AuctionService,
    GatewayError,
    NoAdvisor,
    NotOwner,
    UnknownAuction,
    UnknownAutobid,
)

__all__ = [
    "AdvisorRefused",
    "AuctionService",
    "Config",
    "CorruptLog",
    "Event",
    "EventKind",
    "EventLog",
    "GatewayError",
    "NoAdvisor",
    "NotOwner",
    "UnknownAuction",
    "UnknownAutobid",
    "load_config",
    "read_log",
]
