"""Multi-run experiments built on :func:`lwasim.harness.simulator.run`."""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass, fields
from pathlib import Path

from lwasim.config.settings import Scenario
from lwasim.harness.simulator import run

logger = logging.getLogger(__name__)


@dataclass
class SweepRow:
    """Out-of-order fractions at one offered rate, reordering off and on."""

    rate_bps: float
    ooo_without_reorder: float
    ooo_with_reorder: float
    goodput_without_reorder_bps: float
    goodput_with_reorder_bps: float
    late_dropped: int
    skipped_lost: int


def ooo_sweep(
    scenario: Scenario,
    rates: Sequence[float],
    duration_s: float | None = None,
) -> list[SweepRow]:
    """Run *scenario* at each constant rate, once without and once with reordering.

    Everything except the traffic profile, the reorder switch and
    optionally the duration is taken from *scenario*.
    """
    if not rates:
        raise ValueError("ooo_sweep needs at least one rate")
    rows: list[SweepRow] = []
    base = scenario.with_overrides(duration_s=duration_s)
    for rate in rates:
        data = base.model_dump(mode="json")
        data["traffic"] = {"kind": "cbr", "rate_bps": rate}

        data["reorder"]["enabled"] = False
        plain = run(Scenario.from_dict(data)).summary
        data["reorder"]["enabled"] = True
        ordered = run(Scenario.from_dict(data)).summary

        logger.info(
            "%.1f Mbps: out-of-order %.3f without reordering, %.3f with",
            rate / 1e6,
            plain.ooo_sink_fraction,
            ordered.ooo_sink_fraction,
        )
        rows.append(
            SweepRow(
                rate_bps=rate,
                ooo_without_reorder=plain.ooo_sink_fraction,
                ooo_with_reorder=ordered.ooo_sink_fraction,
                goodput_without_reorder_bps=plain.mean_goodput_bps,
                goodput_with_reorder_bps=ordered.mean_goodput_bps,
                late_dropped=ordered.late_dropped,
                skipped_lost=ordered.skipped_lost,
            )
        )
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: Path) -> Path:
    if not rows:
        raise ValueError("Cannot write an empty sweep")
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [f.name for f in fields(SweepRow)]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow(
                [
                    format(v, ".6g") if isinstance(v, float) else str(v)
                    for v in (getattr(row, n) for n in names)
                ]
            )
    return path
