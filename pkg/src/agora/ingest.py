"""XML feed and advice-document handling.

Three document kinds, all UTF-8 with a fixed element order:

    <advice-request><item-name/><current-bid/><num-bids/>
        <remaining-duration-seconds/></advice-request>
    <advice-response><recommended-bid/><recommended-bid-time/>
        <should-bid/><sample-size/></advice-response>
    <auction-feed><auction site="..."><item-code/><item-name/><category/>
        <closed-price/><num-bids/><close-time/><quantity/></auction></auction-feed>

item-code and category are optional, everything else required. Money and
counts are unsigned decimal integer strings (no sign, no separators);
timestamps are ISO-8601 UTC with a trailing Z. Feed parsing is batch
tolerant: a bad <auction> element becomes one ParseIssue, the rest of the
document still loads.
"""

from __future__ import annotations

import re
import xml.parsers.expat
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Optional
from xml.sax.saxutils import escape, quoteattr

from .warehouse import ClosedAuctionRecord, InvalidRecord, Money, Timestamp, Warehouse

_NUMBER = re.compile(r"^[0-9]+$")
_TIME_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


class IssueKind(Enum):
    MISSING_FIELD = "missing-field"
    BAD_NUMBER = "bad-number"
    BAD_TIMESTAMP = "bad-timestamp"
    MALFORMED = "malformed"


@dataclass(frozen=True)
class ParseIssue:
    line: int
    path: str
    kind: IssueKind
    detail: str


class MalformedDocument(Exception):
    """Document unusable as a whole; carries the issues found."""

    def __init__(self, message: str, issues: Optional[list[ParseIssue]] = None):
        super().__init__(message)
        self.issues = issues or []


@dataclass(frozen=True)
class AdviceRequest:
    item_name: str
    current_bid: Money
    num_bids: int
    remaining_duration: int  # seconds


@dataclass(frozen=True)
class LoadSummary:
    parsed: int
    loaded: int
    duplicates: int
    issues: list[ParseIssue] = field(default_factory=list)


def format_timestamp(ts: Timestamp) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime(_TIME_FORMAT)


def parse_timestamp(text: str) -> Timestamp:
    parsed = datetime.strptime(text, _TIME_FORMAT).replace(tzinfo=timezone.utc)
    return int(parsed.timestamp())


# ---------------------------------------------------------------------------
# Tree building. expat rather than ElementTree so every element keeps the
# source line number ParseIssue needs.


@dataclass
class _Element:
    tag: str
    attrs: dict[str, str]
    line: int
    children: list["_Element"] = field(default_factory=list)
    text_parts: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "".join(self.text_parts)

    def child(self, tag: str) -> Optional["_Element"]:
        for node in self.children:
            if node.tag == tag:
                return node
        return None


def _build_tree(document: str) -> _Element:
    parser = xml.parsers.expat.ParserCreate()
    root: list[_Element] = []
    stack: list[_Element] = []

    def start(tag: str, attrs: dict[str, str]) -> None:
        node = _Element(tag=tag, attrs=attrs, line=parser.CurrentLineNumber)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(tag: str) -> None:
        stack.pop()

    def characters(data: str) -> None:
        if stack:
            stack[-1].text_parts.append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = characters
    try:
        parser.Parse(document, True)
    except xml.parsers.expat.ExpatError as exc:
        raise MalformedDocument(f"not well-formed XML: {exc}") from exc
    if not root:
        raise MalformedDocument("document has no root element")
    return root[0]


# ---------------------------------------------------------------------------
# Field readers shared by the document parsers. Each returns (value, issue);
# exactly one side is set.


def _read_text(parent: _Element, tag: str, path: str) -> tuple[Optional[str], Optional[ParseIssue]]:
    node = parent.child(tag)
    if node is None:
        return None, ParseIssue(parent.line, f"{path}/{tag}", IssueKind.MISSING_FIELD, f"missing <{tag}>")
    value = node.text.strip()
    if not value:
        return None, ParseIssue(node.line, f"{path}/{tag}", IssueKind.MISSING_FIELD, f"empty <{tag}>")
    return value, None


def _read_number(parent: _Element, tag: str, path: str) -> tuple[Optional[int], Optional[ParseIssue]]:
    value, issue = _read_text(parent, tag, path)
    if issue:
        return None, issue
    assert value is not None
    if not _NUMBER.match(value):
        node = parent.child(tag)
        assert node is not None
        return None, ParseIssue(
            node.line, f"{path}/{tag}", IssueKind.BAD_NUMBER, f"not an unsigned integer: {value!r}"
        )
    return int(value), None


def _read_time(parent: _Element, tag: str, path: str) -> tuple[Optional[int], Optional[ParseIssue]]:
    value, issue = _read_text(parent, tag, path)
    if issue:
        return None, issue
    assert value is not None
    try:
        return parse_timestamp(value), None
    except ValueError:
        node = parent.child(tag)
        assert node is not None
        return None, ParseIssue(
            node.line, f"{path}/{tag}", IssueKind.BAD_TIMESTAMP, f"not an ISO-8601 UTC timestamp: {value!r}"
        )


# ---------------------------------------------------------------------------
# Advice documents.


def serialize_advice_request(req: AdviceRequest) -> str:
    return (
        "<advice-request>"
        f"<item-name>{escape(req.item_name)}</item-name>"
        f"<current-bid>{req.current_bid}</current-bid>"
        f"<num-bids>{req.num_bids}</num-bids>"
        f"<remaining-duration-seconds>{req.remaining_duration}</remaining-duration-seconds>"
        "</advice-request>"
    )


def parse_advice_request(document: str) -> AdviceRequest:
    root = _build_tree(document)
    if root.tag != "advice-request":
        raise MalformedDocument(
            f"expected <advice-request> root, got <{root.tag}>",
            [ParseIssue(root.line, root.tag, IssueKind.MALFORMED, "wrong root element")],
        )
    issues: list[ParseIssue] = []
    item_name, issue = _read_text(root, "item-name", "advice-request")
    if issue:
        issues.append(issue)
    current_bid, issue = _read_number(root, "current-bid", "advice-request")
    if issue:
        issues.append(issue)
    num_bids, issue = _read_number(root, "num-bids", "advice-request")
    if issue:
        issues.append(issue)
    remaining, issue = _read_number(root, "remaining-duration-seconds", "advice-request")
    if issue:
        issues.append(issue)
    if issues:
        raise MalformedDocument("invalid advice request", issues)
    assert item_name is not None and current_bid is not None
    assert num_bids is not None and remaining is not None
    return AdviceRequest(
        item_name=item_name,
        current_bid=current_bid,
        num_bids=num_bids,
        remaining_duration=remaining,
    )


def serialize_advice_response(
    recommended_bid: Money, recommended_bid_time: Timestamp, should_bid: bool, sample_size: int
) -> str:
    return (
        "<advice-response>"
        f"<recommended-bid>{recommended_bid}</recommended-bid>"
        f"<recommended-bid-time>{format_timestamp(recommended_bid_time)}</recommended-bid-time>"
        f"<should-bid>{'true' if should_bid else 'false'}</should-bid>"
        f"<sample-size>{sample_size}</sample-size>"
        "</advice-response>"
    )


def parse_advice_response(document: str) -> dict:
    """Field dict for the response document; the UI and tests read it back."""
    root = _build_tree(document)
    if root.tag != "advice-response":
        raise MalformedDocument(f"expected <advice-response> root, got <{root.tag}>")
    issues: list[ParseIssue] = []
    recommended, issue = _read_number(root, "recommended-bid", "advice-response")
    if issue:
        issues.append(issue)
    when, issue = _read_time(root, "recommended-bid-time", "advice-response")
    if issue:
        issues.append(issue)
    flag_text, issue = _read_text(root, "should-bid", "advice-response")
    if issue:
        issues.append(issue)
    elif flag_text not in ("true", "false"):
        node = root.child("should-bid")
        assert node is not None
        issues.append(
            ParseIssue(node.line, "advice-response/should-bid", IssueKind.MALFORMED, f"not a boolean: {flag_text!r}")
        )
    sample, issue = _read_number(root, "sample-size", "advice-response")
    if issue:
        issues.append(issue)
    if issues:
        raise MalformedDocument("invalid advice response", issues)
    return {
        "recommended_bid": recommended,
        "recommended_bid_time": when,
        "should_bid": flag_text == "true",
        "sample_size": sample,
    }


# ---------------------------------------------------------------------------
# Auction feeds.


def serialize_record(rec: ClosedAuctionRecord) -> str:
    parts = [f"<auction site={quoteattr(rec.site)}>"]
    if rec.item_code is not None:
        parts.append(f"<item-code>{escape(rec.item_code)}</item-code>")
    parts.append(f"<item-name>{escape(rec.item_name)}</item-name>")
    if rec.category:
        parts.append(f"<category>{escape(rec.category)}</category>")
    parts.append(f"<closed-price>{rec.closed_price}</closed-price>")
    parts.append(f"<num-bids>{rec.num_bids}</num-bids>")
    parts.append(f"<close-time>{format_timestamp(rec.close_time)}</close-time>")
    parts.append(f"<quantity>{rec.quantity}</quantity>")
    parts.append("</auction>")
    return "".join(parts)


def serialize_feed(records: list[ClosedAuctionRecord]) -> str:
    lines = ["<auction-feed>"]
    lines.extend(serialize_record(rec) for rec in records)
    lines.append("</auction-feed>")
    return "\n".join(lines)


def _parse_auction_element(node: _Element) -> tuple[Optional[ClosedAuctionRecord], Optional[ParseIssue]]:
    # First problem wins: one issue per rejected element keeps
    # parsed = records + issues countable.
    path = "auction-feed/auction"
    site = node.attrs.get("site", "").strip()
    if not site:
        return None, ParseIssue(node.line, path, IssueKind.MISSING_FIELD, "missing site attribute")
    item_name, issue = _read_text(node, "item-name", path)
    if issue:
        return None, issue
    closed_price, issue = _read_number(node, "closed-price", path)
    if issue:
        return None, issue
    num_bids, issue = _read_number(node, "num-bids", path)
    if issue:
        return None, issue
    close_time, issue = _read_time(node, "close-time", path)
    if issue:
        return None, issue
    quantity, issue = _read_number(node, "quantity", path)
    if issue:
        return None, issue

    code_node = node.child("item-code")
    item_code = code_node.text.strip() if code_node is not None else None
    category_node = node.child("category")
    category = category_node.text.strip() if category_node is not None else ""
    assert item_name is not None and closed_price is not None
    assert num_bids is not None and close_time is not None and quantity is not None
    return (
        ClosedAuctionRecord(
            site=site,
            item_name=item_name,
            category=category,
            closed_price=closed_price,
            num_bids=num_bids,
            close_time=close_time,
            quantity=quantity,
            item_code=item_code or None,
        ),
        None,
    )


def parse_feed(document: str) -> tuple[list[ClosedAuctionRecord], list[ParseIssue]]:
    """Records plus one issue per rejected element; never aborts a batch."""
    root = _build_tree(document)
    if root.tag != "auction-feed":
        return [], [ParseIssue(root.line, root.tag, IssueKind.MALFORMED, "expected <auction-feed> root")]
    records: list[ClosedAuctionRecord] = []
    issues: list[ParseIssue] = []
    for node in root.children:
        if node.tag != "auction":
            issues.append(
                ParseIssue(node.line, f"auction-feed/{node.tag}", IssueKind.MALFORMED, f"unexpected <{node.tag}>")
            )
            continue
        record, issue = _parse_auction_element(node)
        if issue:
            issues.append(issue)
        else:
            assert record is not None
            records.append(record)
    return records, issues


def load(
    records: list[ClosedAuctionRecord],
    warehouse: Warehouse,
    on_loaded: Optional[Callable[[ClosedAuctionRecord], None]] = None,
) -> LoadSummary:
    """Add a parsed batch; duplicates counted, invalid records itemized.

    on_loaded fires once per newly stored record (not for duplicates), so
    callers journaling their state can record exactly what changed.
    """
    loaded = 0
    duplicates = 0
    issues: list[ParseIssue] = []
    for rec in records:
        try:
            if warehouse.add_record(rec):
                loaded += 1
                if on_loaded is not None:
                    on_loaded(rec)
            else:
                duplicates += 1
        except InvalidRecord as exc:
            issues.append(ParseIssue(0, "auction-feed/auction", IssueKind.BAD_NUMBER, str(exc)))
    return LoadSummary(parsed=len(records), loaded=loaded, duplicates=duplicates, issues=issues)
