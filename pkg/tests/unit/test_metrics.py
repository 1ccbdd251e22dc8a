"""Tests for metrics records, summaries and CSV output."""

import csv

import pytest

from lwasim.harness.metrics import (
    IntervalCounts,
    MetricsRecord,
    MetricsReport,
    OutOfOrderCounter,
    RunSummary,
    summarize,
    write_csv,
)


def _record(t_s: float, **overrides) -> MetricsRecord:
    values = dict(
        t_s=t_s,
        offered_bps=20e6,
        lte_tx_bps=11.2e6,
        wifi_tx_bps=8.123456789e6,
        sink_goodput_bps=19.3e6,
        ooo_raw_fraction=0.25,
        ooo_sink_fraction=0.0,
        reorder_skipped=0,
        reorder_late=1,
        q_lte_pkts=12,
        q_wifi_pkts=3,
        mode="lwa",
        share_wifi=0.5,
        l_i_bytes=2_500_000,
    )
    values.update(overrides)
    return MetricsRecord(**values)


def test_out_of_order_counter():
    """Test arrivals behind the running maximum are counted."""
    counter = OutOfOrderCounter()

    flags = [counter.observe(i) for i in (0, 2, 1, 3, 3, 5, 4)]

    assert flags == [False, False, True, False, False, False, True]
    assert counter.fraction == pytest.approx(2 / 7)
    assert OutOfOrderCounter().fraction == 0.0


def test_write_csv(tmp_path):
    """Test header row and float formatting."""
    report = MetricsReport(records=[_record(0.1), _record(0.2, mode="switch")])
    path = tmp_path / "out" / "metrics.csv"

    write_csv(report, path)

    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0][:3] == ["t_s", "offered_bps", "lte_tx_bps"]
    assert rows[0][-1] == "l_i_bytes"
    assert len(rows) == 3
    row = dict(zip(rows[0], rows[1], strict=True))
    assert row["wifi_tx_bps"] == "8.12346e+06"
    assert row["q_lte_pkts"] == "12"
    assert row["mode"] == "lwa"
    assert dict(zip(rows[0], rows[2], strict=True))["mode"] == "switch"
    assert path.read_text().count("\r") == 0


def test_write_csv_empty_report(tmp_path):
    """Test an empty report is an error."""
    with pytest.raises(ValueError):
        write_csv(MetricsReport(), tmp_path / "empty.csv")


def test_report_window():
    """Test window selection by interval bounds."""
    report = MetricsReport(records=[_record(round(0.1 * i, 1)) for i in range(1, 21)])

    selected = report.window(1.0, 1.5)

    assert [r.t_s for r in selected] == [1.1, 1.2, 1.3, 1.4, 1.5]


def test_summarize_skips_warmup():
    """Test warm-up intervals are excluded from means."""
    counts = [
        IntervalCounts(0, 100, offered_bytes=10_000, sink_bytes=0, raw_arrivals=5, raw_ooo=5),
        IntervalCounts(100, 200, offered_bytes=250_000, sink_bytes=125_000,
                       raw_arrivals=10, raw_ooo=2, sink_arrivals=10),
    ]

    result = summarize(counts, warmup_ms=100)

    assert result["mean_offered_bps"] == pytest.approx(20e6)
    assert result["mean_goodput_bps"] == pytest.approx(10e6)
    assert result["ooo_raw_fraction"] == pytest.approx(0.2)
    assert result["ooo_sink_fraction"] == 0.0
    assert summarize([], warmup_ms=0)["mean_goodput_bps"] == 0.0


def test_ledger_balance():
    """Test the unaccounted count closes the ledger."""
    summary = RunSummary(
        sourced=100,
        delivered=90,
        late_dropped=2,
        wifi_lost=3,
        lte_tb_lost=1,
        framing_discarded=1,
        in_flight_at_end=3,
        duplicates=4,
    )

    assert summary.unaccounted == 0
    assert summary.as_dict()["unaccounted"] == 0
    assert summary.as_dict()["duplicates"] == 4
