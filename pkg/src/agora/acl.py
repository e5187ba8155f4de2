"""Agent platform: white pages, yellow pages, and message transport.

A single in-process platform hosts every agent. The registry hands out
agent identifiers, the service directory answers capability lookups, and
the transport appends immutable messages to per-agent FIFO mailboxes. No
message is silently lost: sends to unknown receivers bounce back to the
sender as a FAILURE message.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional


class PlatformError(Exception):
    """Base class for agent-platform errors."""


class DuplicateName(PlatformError):
    pass


class UnknownAgent(PlatformError):
    pass


class DuplicateService(PlatformError):
    pass


class UnknownSender(PlatformError):
    pass


class ProtocolViolation(PlatformError):
    pass


class ProtocolTimeout(PlatformError):
    pass


class Performative(Enum):
    """Speech-act label carried by every message. Exactly seven exist."""

    ACCEPT_PROPOSAL = "accept-proposal"
    AGREE = "agree"
    INFORM = "inform"
    FAILURE = "failure"
    PROPOSE = "propose"
    REFUSE = "refuse"
    REQUEST = "request"


@dataclass(frozen=True)
class AgentId:
    """Identifier issued by the registry: unique name plus platform address."""

    name: str
    address: str


@dataclass(frozen=True)
class AclMessage:
    """Performative-tagged inter-agent message.

    conversation_id ties together all messages of one interaction; a reply
    carries the triggering message's reply_with in its in_reply_to field.
    Content is an opaque string payload interpreted by higher layers.
    """

    performative: Performative
    sender: AgentId
    receivers: tuple[AgentId, ...]
    content: str
    conversation_id: str
    protocol: str = ""
    reply_with: Optional[str] = None
    in_reply_to: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.receivers:
            raise ValueError("message must have at least one receiver")


@dataclass(frozen=True)
class ServiceDescription:
    """Yellow-pages entry: which agent provides which named service."""

    provider: AgentId
    service_type: str
    service_name: str


@dataclass
class ProtocolOutcome:
    """Result of one request interaction: full transcript plus terminal message."""

    transcript: list[AclMessage]
    final: AclMessage


# A participant handler consumes the incoming REQUEST and yields its replies
# as (performative, content) pairs. The platform validates the sequence
# against the request-protocol grammar and puts each reply on the wire.
RequestHandler = Callable[[AclMessage], Iterable[tuple[Performative, str]]]

# Sequences a participant may emit in the request protocol:
# AGREE then (INFORM | FAILURE), or a lone REFUSE.
_TERMINALS = (Performative.INFORM, Performative.FAILURE, Performative.REFUSE)


def request_handler(
    accept: Callable[[AclMessage], bool],
    perform: Callable[[AclMessage], str],
) -> RequestHandler:
    """Build a grammar-compliant handler from an accept check and an action.

    accept() returning False yields REFUSE; otherwise AGREE is emitted and
    perform() runs, its return value becoming the INFORM content. Any
    exception from perform() becomes the FAILURE content.
    """

    def handle(msg: AclMessage) -> Iterable[tuple[Performative, str]]:
        if not accept(msg):
            yield Performative.REFUSE, "request refused"
            return
        yield Performative.AGREE, ""
        try:
            yield Performative.INFORM, perform(msg)
        except Exception as exc:
            yield Performative.FAILURE, str(exc)

    return handle


class AgentPlatform:
    """One registry, one service directory, one transport.

    All state is guarded by a single lock, making register/search/send
    linearizable under concurrent callers. Mailboxes are unbounded FIFO
    queues with one consumer each (the owning agent).
    """

    TRANSPORT_NAME = "acc"

    def __init__(self, address: str = "local", request_timeout: float = 5.0):
        self.address = address
        self.request_timeout = request_timeout
        self._lock = threading.RLock()
        self._agents: dict[str, AgentId] = {}
        self._mailboxes: dict[str, deque[AclMessage]] = {}
        self._services: list[ServiceDescription] = []
        self._handlers: dict[str, RequestHandler] = {}
        self._conversation_counter = 0

    # -- white pages ------------------------------------------------------

    def ams_register(self, name: str) -> AgentId:
        """Register a new agent name, returning its identifier with an empty mailbox."""
        if not name:
            raise ValueError("agent name must be non-empty")
        with self._lock:
            if name in self._agents:
                raise DuplicateName(f"agent name already registered: {name!r}")
            aid = AgentId(name=name, address=self.address)
            self._agents[name] = aid
            self._mailboxes[name] = deque()
            return aid

    def ams_deregister(self, aid: AgentId) -> None:
        """Remove an agent: name freed, directory entries dropped, mailbox discarded."""
        with self._lock:
            if self._agents.get(aid.name) != aid:
                raise UnknownAgent(f"not a registered agent: {aid.name!r}")
            del self._agents[aid.name]
            del self._mailboxes[aid.name]
            self._handlers.pop(aid.name, None)
            self._services = [sd for sd in self._services if sd.provider != aid]

    def ams_lookup(self, name: str) -> AgentId:
        with self._lock:
            aid = self._agents.get(name)
            if aid is None:
                raise UnknownAgent(f"not a registered agent: {name!r}")
            return aid

    def is_registered(self, aid: AgentId) -> bool:
        with self._lock:
            return self._agents.get(aid.name) == aid

    # -- yellow pages -----------------------------------------------------

    def df_register(self, sd: ServiceDescription) -> None:
        """Add a service entry; the provider must hold a live registration."""
        with self._lock:
            if self._agents.get(sd.provider.name) != sd.provider:
                raise UnknownAgent(f"provider not registered: {sd.provider.name!r}")
            if sd in self._services:
                raise DuplicateService(
                    f"service already registered: {sd.service_type}/{sd.service_name}"
                )
            self._services.append(sd)

    def df_search(self, service_type: str) -> list[ServiceDescription]:
        """All current entries of the given type, in registration order."""
        with self._lock:
            return [sd for sd in self._services if sd.service_type == service_type]

    # -- transport --------------------------------------------------------

    def acc_send(self, msg: AclMessage) -> None:
        """Deliver to every receiver's mailbox in send order.

        Unknown receivers bounce: a synthesized FAILURE naming the missing
        agent lands in the sender's mailbox instead of a silent drop.
        """
        with self._lock:
            if self._agents.get(msg.sender.name) != msg.sender:
                raise UnknownSender(f"sender is not a platform agent: {msg.sender.name!r}")
            for receiver in msg.receivers:
                box = self._mailboxes.get(receiver.name)
                if box is not None and self._agents[receiver.name] == receiver:
                    box.append(msg)
                else:
                    bounce = AclMessage(
                        performative=Performative.FAILURE,
                        sender=AgentId(self.TRANSPORT_NAME, self.address),
                        receivers=(msg.sender,),
                        content=f"unknown receiver: {receiver.name}@{receiver.address}",
                        conversation_id=msg.conversation_id,
                        protocol=msg.protocol,
                        in_reply_to=msg.reply_with,
                    )
                    self._mailboxes[msg.sender.name].append(bounce)

    def receive(self, aid: AgentId) -> Optional[AclMessage]:
        """Pop the oldest mailbox message, or None when the box is empty."""
        with self._lock:
            if self._agents.get(aid.name) != aid:
                raise UnknownAgent(f"not a registered agent: {aid.name!r}")
            box = self._mailboxes[aid.name]
            return box.popleft() if box else None

    def mailbox_size(self, aid: AgentId) -> int:
        with self._lock:
            if self._agents.get(aid.name) != aid:
                raise UnknownAgent(f"not a registered agent: {aid.name!r}")
            return len(self._mailboxes[aid.name])

    def next_conversation_id(self) -> str:
        with self._lock:
            self._conversation_counter += 1
            return str(self._conversation_counter)

    # -- request protocol ---------------------------------------------------

    def set_request_handler(self, aid: AgentId, handler: RequestHandler) -> None:
        with self._lock:
            if self._agents.get(aid.name) != aid:
                raise UnknownAgent(f"not a registered agent: {aid.name!r}")
            self._handlers[aid.name] = handler

    def run_request_protocol(
        self,
        initiator: AgentId,
        participant: AgentId,
        content: str,
        timeout: Optional[float] = None,
    ) -> ProtocolOutcome:
        """Run one REQUEST interaction and return its transcript.

        The exchange must match REQUEST (AGREE (INFORM|FAILURE) | REFUSE);
        any other reply sequence raises ProtocolViolation. A handler that
        exceeds the deadline (or a participant with no handler at all, from
        whom no reply will ever come) raises ProtocolTimeout.
        """
        deadline = time.monotonic() + (timeout if timeout is not None else self.request_timeout)
        conversation = self.next_conversation_id()
        request = AclMessage(
            performative=Performative.REQUEST,
            sender=initiator,
            receivers=(participant,),
            content=content,
            conversation_id=conversation,
            protocol="fipa-request",
            reply_with=f"{conversation}-req",
        )
        self.acc_send(request)
        with self._lock:
            handler = self._handlers.get(participant.name)
            # The participant consumes the request from its mailbox.
            box = self._mailboxes.get(participant.name)
            if box and box[-1] is request:
                box.pop()
        if handler is None:
            raise ProtocolTimeout(f"participant {participant.name!r} never replied")

        transcript = [request]
        agreed = False
        done = False
        replies = iter(handler(request))
        while True:
            try:
                performative, reply_content = next(replies)
            except StopIteration:
                break
            if time.monotonic() > deadline:
                raise ProtocolTimeout(
                    f"participant {participant.name!r} exceeded the reply deadline"
                )
            if done:
                raise ProtocolViolation(f"reply after terminal message: {performative.value}")
            if not agreed and performative == Performative.AGREE:
                agreed = True
            elif not agreed and performative == Performative.REFUSE:
                done = True
            elif agreed and performative in (Performative.INFORM, Performative.FAILURE):
                done = True
            else:
                raise ProtocolViolation(
                    f"unexpected {performative.value} "
                    f"{'after' if agreed else 'before'} agreement"
                )
            reply = AclMessage(
                performative=performative,
                sender=participant,
                receivers=(initiator,),
                content=reply_content,
                conversation_id=conversation,
                protocol="fipa-request",
                in_reply_to=request.reply_with,
            )
            self.acc_send(reply)
            transcript.append(reply)
        if not done:
            raise ProtocolViolation("participant ended the conversation without a terminal message")
        return ProtocolOutcome(transcript=transcript, final=transcript[-1])

    # -- diagnostics --------------------------------------------------------

    def dump_registries(self) -> str:
        """Line-delimited snapshot of both registries, for debugging."""
        with self._lock:
            lines = [f"agent {aid.name} {aid.address}" for aid in self._agents.values()]
            lines += [
                f"service {sd.provider.name} {sd.service_type} {sd.service_name}"
                for sd in self._services
            ]
        return "\n".join(lines)
