"""Command-line behavior: outputs and the 0/1/2 exit-code contract."""

import json
import pathlib

from agora.cli import main
from agora.ingest import format_timestamp, serialize_feed
from agora.warehouse import ClosedAuctionRecord

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_command_is_usage_error(capsys):
    code, _, err = run([], capsys)
    assert code == 1
    assert "usage" in err


def test_unknown_flag_is_usage_error(capsys):
    code, _, _ = run(["import", "--frobnicate"], capsys)
    assert code == 1


def test_help_exits_zero(capsys):
    code, out, _ = run(["--help"], capsys)
    assert code == 0
    assert "simulate" in out


def test_import_loads_and_reports_counts(tmp_path, capsys):
    code, out, err = run(
        ["import", str(FIXTURES / "camera_feed.xml"), "--data-dir", str(tmp_path)], capsys
    )
    assert code == 0
    assert out.strip() == "loaded 7, duplicates 0"
    assert err == ""
    # the second import finds every record already present
    code, out, _ = run(
        ["import", str(FIXTURES / "camera_feed.xml"), "--data-dir", str(tmp_path)], capsys
    )
    assert code == 0
    assert out.strip() == "loaded 0, duplicates 7"


def test_import_prints_issues_to_stderr(tmp_path, capsys):
    code, out, err = run(
        ["import", str(FIXTURES / "feed_bad_number.xml"), "--data-dir", str(tmp_path)], capsys
    )
    assert code == 0
    assert out.strip() == "loaded 1, duplicates 0"
    issue_lines = err.strip().splitlines()
    assert len(issue_lines) == 2
    assert all("bad-number" in line for line in issue_lines)
    assert all(line.startswith("line ") for line in issue_lines)


def test_import_missing_file_is_data_error(tmp_path, capsys):
    code, _, err = run(["import", str(tmp_path / "nope.xml")], capsys)
    assert code == 2
    assert err.startswith("error:")


def test_report_stats_and_prediction_unavailable(tmp_path, capsys):
    run(["import", str(FIXTURES / "camera_feed.xml"), "--data-dir", str(tmp_path)], capsys)
    code, out, _ = run(
        ["report", "--item", "Sony Digital Camera C-3020", "--data-dir", str(tmp_path)], capsys
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert "sample size: 7" in lines
    assert "min: 6323" in lines
    assert "median: 7330" in lines
    assert "max: 9360" in lines
    # fixture closes all fall in one period window, so no past data
    assert lines[-1] == "prediction unavailable: no records in the past period window"


def test_report_with_prediction(tmp_path, capsys):
    day = 86_400
    import time as time_mod

    now = int(time_mod.time())
    records = []
    for i in range(3):
        records.append(ClosedAuctionRecord(
            site="ebay", item_name="camera", category="", closed_price=100 + i,
            num_bids=2, close_time=now - 400 * day + i,
        ))
        records.append(ClosedAuctionRecord(
            site="ebay", item_name="camera", category="", closed_price=200 + i,
            num_bids=2, close_time=now - 100 * day + i,
        ))
    feed = tmp_path / "feed.xml"
    feed.write_text(serialize_feed(records), encoding="utf-8")
    run(["import", str(feed), "--data-dir", str(tmp_path)], capsys)

    code, out, _ = run(
        ["report", "--item", "camera", "--seed", "7", "--data-dir", str(tmp_path)], capsys
    )
    assert code == 0
    assert "prediction (seed 7):" in out
    assert "past: 101" in out
    assert "present: 201" in out
    assert "variant2: 151.0" in out
    # deterministic: a second run prints the identical report
    code2, out2, _ = run(
        ["report", "--item", "camera", "--seed", "7", "--data-dir", str(tmp_path)], capsys
    )
    assert (code2, out2) == (code, out)


def test_report_unknown_item_is_data_error(tmp_path, capsys):
    code, _, err = run(["report", "--item", "yacht", "--data-dir", str(tmp_path)], capsys)
    assert code == 2
    assert err.startswith("error:")


def test_report_requires_item_flag(tmp_path, capsys):
    code, _, _ = run(["report", "--data-dir", str(tmp_path)], capsys)
    assert code == 1


def test_simulate_prints_golden_transcript(capsys):
    code, out, _ = run(
        ["simulate", "--scenario", str(FIXTURES / "duel_scenario.json")], capsys
    )
    assert code == 0
    golden = (FIXTURES / "duel_transcript.golden.jsonl").read_text().strip()
    assert out.strip() == golden
    for line in out.strip().splitlines():
        entry = json.loads(line)
        assert set(entry) == {"time", "kind", "auction_id", "detail"}


def test_simulate_rejects_bad_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    code, _, err = run(["simulate", "--scenario", str(bad)], capsys)
    assert code == 2
    assert err.startswith("error:")


def test_config_file_flows_through(tmp_path, capsys):
    data_dir = tmp_path / "store"
    conf = tmp_path / "agora.conf"
    conf.write_text(f"data_dir={data_dir}\nmin_history=1\n")
    run(["import", str(FIXTURES / "ring_feed.xml"), "--config", str(conf)], capsys)
    assert (data_dir / "events.log").exists()
    code, out, _ = run(
        ["report", "--item", "Gents Ring With weight 10.0g - Size 10.", "--config", str(conf)],
        capsys,
    )
    assert code == 0
    # min_history=1 keeps the report on the single exact match
    assert "sample size: 1" in out
    assert "median: 18000" in out


def test_bad_config_is_data_error(tmp_path, capsys):
    conf = tmp_path / "agora.conf"
    conf.write_text("mystery=1\n")
    code, _, err = run(["report", "--item", "x", "--config", str(conf)], capsys)
    assert code == 2
    assert "mystery" in err
