"""Command-line entry points.

    agora serve    [--config FILE] [--port N] [--data-dir DIR]
    agora import   FILE [--config FILE] [--data-dir DIR]
    agora report   --item NAME [--seed N] [--config FILE] [--data-dir DIR]
    agora simulate --scenario FILE [--seed N]

Exit codes: 0 success, 1 usage error, 2 data error (unreadable file,
malformed document, no matching data, corrupt log).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import threading
import time
from pathlib import Path
from typing import Optional

from . import simharness
from .gateway.config import Config, ConfigError, load_config
from .gateway.events import CorruptLog
from .gateway.service import AuctionService
from .ingest import MalformedDocument
from .simharness import InvalidScenario
from .warehouse import InsufficientHistory, NoData


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agora", description="agent-based auction platform")
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", type=Path, default=None, help="key=value configuration file")
        sub.add_argument("--data-dir", type=Path, default=None, help="event-log directory")

    serve = commands.add_parser("serve", help="run the API server and event stream")
    common(serve)
    serve.add_argument("--port", type=int, default=None)

    imp = commands.add_parser("import", help="load an auction-feed XML file")
    common(imp)
    imp.add_argument("file", type=Path)

    report = commands.add_parser("report", help="statistics and prediction for an item")
    common(report)
    report.add_argument("--item", required=True)
    report.add_argument("--seed", type=int, default=None)

    simulate = commands.add_parser("simulate", help="run a scripted scenario")
    simulate.add_argument("--scenario", type=Path, required=True)
    simulate.add_argument("--seed", type=int, default=None)
    return parser


def _configure(args: argparse.Namespace) -> Config:
    config = load_config(args.config)
    if getattr(args, "data_dir", None) is not None:
        config.data_dir = args.data_dir
    if getattr(args, "port", None) is not None:
        config.port = args.port
    return config


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .gateway.api import create_app

    config = _configure(args)
    service = AuctionService(config)
    if service.recovered_truncated:
        print(f"recovered log with {service.recovered_truncated} truncated line", file=sys.stderr)

    def ticker() -> None:
        while True:
            time.sleep(1)
            service.poll()

    threading.Thread(target=ticker, daemon=True).start()
    uvicorn.run(create_app(service), host="127.0.0.1", port=config.port, log_level="warning")
    return 0


def _cmd_import(args: argparse.Namespace) -> int:
    config = _configure(args)
    document = args.file.read_text(encoding="utf-8")
    service = AuctionService(config)
    try:
        summary, parse_issues = service.import_feed(document)
    finally:
        service.close()
    for issue in [*parse_issues, *summary.issues]:
        print(f"line {issue.line} {issue.path}: {issue.kind.value}: {issue.detail}", file=sys.stderr)
    print(f"loaded {summary.loaded}, duplicates {summary.duplicates}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    config = _configure(args)
    service = AuctionService(config)
    try:
        stats = service.stats_report(args.item)
        print(f"item: {stats['item_name']}")
        print(f"sample size: {stats['sample_size']}")
        print(f"min: {stats['min']}")
        print(f"median: {stats['median']}")
        print(f"max: {stats['max']}")
        print(f"quantity sold: {stats['quantity_sold']}")
        try:
            prediction = service.prediction_report(args.item, seed=args.seed)
        except InsufficientHistory as exc:
            print(f"prediction unavailable: no records in the {exc} period window")
            return 0
        print(f"prediction (seed {prediction['seed']}):")
        print(f"  past: {prediction['past']}")
        print(f"  present: {prediction['present']}")
        print(f"  variant1: {prediction['variant1']}")
        print(f"  variant2: {prediction['variant2']}")
        print(f"  future: {prediction['future']}")
        return 0
    finally:
        service.close()


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = simharness.load_scenario(args.scenario.read_text(encoding="utf-8"))
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    transcript = simharness.run_scenario(spec)
    print(transcript.to_jsonl())
    return 0


_DATA_ERRORS = (
    ConfigError,
    CorruptLog,
    InsufficientHistory,
    InvalidScenario,
    MalformedDocument,
    NoData,
    OSError,
)


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; this interface reserves 2
        # for data errors and uses 1 for usage.
        return 0 if exc.code == 0 else 1
    handlers = {
        "serve": _cmd_serve,
        "import": _cmd_import,
        "report": _cmd_report,
        "simulate": _cmd_simulate,
    }
    try:
        return handlers[args.command](args)
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
