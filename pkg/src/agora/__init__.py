"""Agent-based online auction platform.

Modules:
    acl         agent registry, service directory, message transport
    engine      English-auction state machine with anti-sniping extension
    autobid     proxy bidding agents that follow the action on behalf of a buyer
    advisor     rule-based bidding advice from past closed auctions
    warehouse   closed-auction statistics and price prediction
    ingest      XML feed parsing and serialization
    simharness  deterministic multi-agent simulation runner
    gateway     HTTP/event-stream/CLI front ends over an event-sourced service
"""

__version__ = "0.1.0"
