"""Append-only event log: one JSON object per line, sequence-numbered.

Line shape, key order fixed:

    {"sequence": 7, "time": 1723900000, "kind": "BID_ACCEPTED", "payload": {...}}

Sequences start at 1 and are gap-free. A final line cut short by a crash
is recoverable (everything before it replays, the stub is reported); a
bad line anywhere else means the log cannot be trusted and reading stops
with CorruptLog.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

LOG_FILENAME = "events.log"


class CorruptLog(Exception):
    pass


class EventKind(Enum):
    AUCTION_OPENED = "AUCTION_OPENED"
    BID_ACCEPTED = "BID_ACCEPTED"
    BID_REJECTED = "BID_REJECTED"
    EXTENDED = "EXTENDED"
    AUTOBID_CREATED = "AUTOBID_CREATED"
    AUTOBID_AT_MAX = "AUTOBID_AT_MAX"
    AUTOBID_CANCELLED = "AUTOBID_CANCELLED"
    CLOSED = "CLOSED"
    ADVICE_SERVED = "ADVICE_SERVED"
    RECORD_ADDED = "RECORD_ADDED"


@dataclass(frozen=True)
class Event:
    sequence: int
    time: int
    kind: EventKind
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {
                "sequence": self.sequence,
                "time": self.time,
                "kind": self.kind.value,
                "payload": self.payload,
            }
        )


class _TornLine(Exception):
    """Line does not parse as JSON at all: the torn-write signature."""


def _event_from_line(line: str, expected_sequence: int) -> Event:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise _TornLine(str(exc)) from exc
    try:
        event = Event(
            sequence=int(raw["sequence"]),
            time=int(raw["time"]),
            kind=EventKind(raw["kind"]),
            payload=raw["payload"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptLog(f"unreadable event at sequence {expected_sequence}: {exc}") from exc
    if event.sequence != expected_sequence:
        raise CorruptLog(f"expected sequence {expected_sequence}, found {event.sequence}")
    return event


def read_log(data_dir: Path) -> tuple[list[Event], int]:
    """All complete events plus how many trailing truncated lines were dropped.

    Only the final line may be damaged (the crash case); damage earlier
    in the file raises CorruptLog naming the first bad sequence.
    """
    path = Path(data_dir) / LOG_FILENAME
    if not path.exists():
        return [], 0
    events: list[Event] = []
    truncated = 0
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for index, line in enumerate(lines):
        expected = len(events) + 1
        try:
            events.append(_event_from_line(line, expected))
        except _TornLine as exc:
            if index == len(lines) - 1:
                truncated = 1
            else:
                raise CorruptLog(f"unreadable event at sequence {expected}: {exc}") from exc
    return events, truncated


class EventLog:
    """Writer and in-memory tail of the log for one data directory."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.path = self.data_dir / LOG_FILENAME
        self._events: list[Event] = []
        self._handle = None

    @property
    def last_sequence(self) -> int:
        return self._events[-1].sequence if self._events else 0

    def events(self) -> list[Event]:
        return list(self._events)

    def events_since(self, sequence: int) -> list[Event]:
        return [e for e in self._events if e.sequence > sequence]

    def open_existing(self, events: list[Event]) -> None:
        """Adopt already-replayed events; appends continue their numbering.

        A truncated final line is overwritten: the file is rewritten to
        exactly the recovered events before appending resumes.
        """
        self._events = list(events)
        with open(self.path, "w", encoding="utf-8") as handle:
            for event in events:
                handle.write(event.to_line() + "\n")
        self._handle = open(self.path, "a", encoding="utf-8")

    def _ensure_open(self) -> None:
        if self._handle is None:
            self._handle = open(self.path, "a", encoding="utf-8")

    def append(self, kind: EventKind, payload: dict, time: int) -> Event:
        self._ensure_open()
        event = Event(sequence=self.last_sequence + 1, time=time, kind=kind, payload=payload)
        assert self._handle is not None
        self._handle.write(event.to_line() + "\n")
        self._handle.flush()
        os.fsync(self._handle.fileno())
        self._events.append(event)
        return event

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
