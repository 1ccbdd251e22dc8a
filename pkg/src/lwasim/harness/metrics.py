"""Per-interval metrics, the run summary and CSV export."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

INTERVAL_MS = 100


@dataclass
class MetricsRecord:
    """One 100 ms interval; ``t_s`` is the interval's end."""

    t_s: float
    offered_bps: float
    lte_tx_bps: float
    wifi_tx_bps: float
    sink_goodput_bps: float
    ooo_raw_fraction: float
    ooo_sink_fraction: float
    reorder_skipped: int
    reorder_late: int
    q_lte_pkts: int
    q_wifi_pkts: int
    mode: str
    share_wifi: float
    l_i_bytes: int


class OutOfOrderCounter:
    """Counts arrivals whose id is behind the largest id already seen."""

    def __init__(self) -> None:
        self.max_seen: int | None = None
        self.arrivals = 0
        self.out_of_order = 0

    def observe(self, ident: int) -> bool:
        self.arrivals += 1
        if self.max_seen is not None and ident < self.max_seen:
            self.out_of_order += 1
            return True
        self.max_seen = ident if self.max_seen is None else max(self.max_seen, ident)
        return False

    @property
    def fraction(self) -> float:
        return self.out_of_order / self.arrivals if self.arrivals else 0.0


@dataclass
class IntervalCounts:
    """Raw counts behind a record, kept for warm-up-aware summaries."""

    start_ms: int
    end_ms: int
    offered_bytes: int = 0
    sink_bytes: int = 0
    raw_arrivals: int = 0
    raw_ooo: int = 0
    sink_arrivals: int = 0
    sink_ooo: int = 0


@dataclass
class RunSummary:
    """Totals for a run; the first seven fields form the accounting ledger."""

    sourced: int = 0
    delivered: int = 0
    late_dropped: int = 0
    wifi_lost: int = 0
    lte_tb_lost: int = 0
    framing_discarded: int = 0
    in_flight_at_end: int = 0
    duplicates: int = 0
    skipped_lost: int = 0
    integrity_failures: int = 0
    mean_offered_bps: float = 0.0
    mean_goodput_bps: float = 0.0
    ooo_raw_fraction: float = 0.0
    ooo_sink_fraction: float = 0.0
    mode_changes: int = 0
    reassembly: dict[str, int] = field(default_factory=dict)

    @property
    def unaccounted(self) -> int:
        return self.sourced - (
            self.delivered
            + self.late_dropped
            + self.wifi_lost
            + self.lte_tb_lost
            + self.framing_discarded
            + self.in_flight_at_end
        )

    def as_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["unaccounted"] = self.unaccounted
        return data


@dataclass
class MetricsReport:
    records: list[MetricsRecord] = field(default_factory=list)
    summary: RunSummary = field(default_factory=RunSummary)

    def window(self, start_s: float, end_s: float) -> list[MetricsRecord]:
        """Records whose interval lies inside ``[start_s, end_s]``."""
        eps = 1e-9
        return [
            r for r in self.records
            if r.t_s - INTERVAL_MS / 1000.0 >= start_s - eps and r.t_s <= end_s + eps
        ]


def summarize(counts: list[IntervalCounts], warmup_ms: int) -> dict[str, float]:
    """Goodput and out-of-order fractions over intervals after warm-up."""
    kept = [c for c in counts if c.start_ms >= warmup_ms]
    span_ms = sum(c.end_ms - c.start_ms for c in kept)
    raw_arrivals = sum(c.raw_arrivals for c in kept)
    sink_arrivals = sum(c.sink_arrivals for c in kept)
    return {
        "mean_offered_bps": sum(c.offered_bytes for c in kept) * 8000.0 / span_ms if span_ms else 0.0,
        "mean_goodput_bps": sum(c.sink_bytes for c in kept) * 8000.0 / span_ms if span_ms else 0.0,
        "ooo_raw_fraction": sum(c.raw_ooo for c in kept) / raw_arrivals if raw_arrivals else 0.0,
        "ooo_sink_fraction": sum(c.sink_ooo for c in kept) / sink_arrivals if sink_arrivals else 0.0,
    }


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def write_csv(report: MetricsReport, path: Path) -> Path:
    """One header row, then one row per interval, floats to 6 significant digits."""
    if not report.records:
        raise ValueError("Cannot write an empty metrics report")
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [f.name for f in fields(MetricsRecord)]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(names)
        for record in report.records:
            writer.writerow([_format(getattr(record, name)) for name in names])
    return path
