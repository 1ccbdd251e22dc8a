"""Discrete-event run of one scenario: eNB -> {LTE, WiFi} -> UE -> sink.

Time is in milliseconds on a ``simpy.Environment``. A clock process runs
the eNB once per 1 ms subframe, in this order:

1. close the metrics interval on a 100 ms boundary
2. generate SDUs and let the flow controller account load and sense queues
3. number each SDU in PDCP, route it and queue it on its link
4. serve one LTE subframe
5. apply the reorder hold timer

Link arrivals are separate timed events feeding the UE merge point.
"""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Generator
from typing import Any

import numpy as np
import simpy

from lwasim.channel.ethernet import WrongEthertypeError, decap_eth, encap_eth, parse_mac
from lwasim.channel.lte import LteDelivery, LteLink, lte_tick
from lwasim.channel.wifi import WifiLink
from lwasim.config.settings import Scenario
from lwasim.flowctl.controller import FlowController
from lwasim.flowctl.types import Link
from lwasim.framing.codec import decode
from lwasim.framing.reassembler import Reassembler
from lwasim.harness.metrics import (
    INTERVAL_MS,
    IntervalCounts,
    MetricsRecord,
    MetricsReport,
    OutOfOrderCounter,
    RunSummary,
    summarize,
)
from lwasim.harness.traffic import TrafficGenerator, gen_traffic, sdu_id
from lwasim.pdcp.entity import PdcpPdu, PdcpTxState, pdcp_rx, pdcp_tx
from lwasim.reorder.buffer import ReorderBuffer

logger = logging.getLogger(__name__)

# Independent streams spawned from the scenario seed.
_STREAMS = ("traffic", "lte_delay", "lte_loss", "wifi_delay", "wifi_loss")


class Simulator:
    """Owns every component of one run. Use :meth:`run` once."""

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.env = simpy.Environment()
        self.duration_ms = int(round(scenario.duration_s * 1000))

        seeds = np.random.SeedSequence(scenario.seed).spawn(len(_STREAMS))
        rngs = {name: np.random.default_rng(s) for name, s in zip(_STREAMS, seeds, strict=True)}

        self.traffic = TrafficGenerator(scenario.traffic, scenario.sdu_size_bytes, rngs["traffic"])
        self.pdcp = PdcpTxState()
        self.controller = FlowController(scenario.controller)
        self.lte = LteLink(scenario.lte, rngs["lte_delay"], rngs["lte_loss"])
        self.wifi = WifiLink(
            scenario.wifi,
            rngs["wifi_delay"],
            rngs["wifi_loss"],
            env=self.env,
            on_receive=self._on_wifi_frame,
        )
        self.reassembler = Reassembler()
        self.reorder: ReorderBuffer | None = None
        if scenario.reorder.enabled:
            self.reorder = ReorderBuffer(
                window_size=scenario.reorder.window_size,
                hold_timer_ms=scenario.reorder.hold_timer_ms,
            )

        self._dst_mac = parse_mac(scenario.wifi.dst_mac)
        self._src_mac = parse_mac(scenario.wifi.src_mac)
        self._digests: dict[int, bytes] = {}
        self._lte_in_transit = 0
        self._last_mode = self.controller.mode

        self.summary = RunSummary()
        self.records: list[MetricsRecord] = []
        self.counts: list[IntervalCounts] = []
        self._raw_ooo = OutOfOrderCounter()
        self._sink_ooo = OutOfOrderCounter()
        self._interval = IntervalCounts(start_ms=0, end_ms=0)
        self._prev_lte_bytes = 0
        self._prev_wifi_bytes = 0
        self._prev_skipped = 0
        self._prev_late = 0
        self._finished = False

    # -- eNB ------------------------------------------------------------------

    def _clock(self) -> Generator[Any, Any, None]:
        for t in range(self.duration_ms):
            self._tick(t)
            yield self.env.timeout(1)

    def _tick(self, t: int) -> None:
        if t > 0 and t % INTERVAL_MS == 0:
            self._close_interval(t)

        sdus = gen_traffic(self.traffic, t)
        offered = sum(len(s.payload) for s in sdus)
        self._interval.offered_bytes += offered
        self.controller.on_tick(t, offered, self.lte.queue_len(), self.wifi.queue_len())
        if self.controller.mode is not self._last_mode:
            self.summary.mode_changes += 1
            self._last_mode = self.controller.mode

        for sdu in sdus:
            self.summary.sourced += 1
            self._digests[sdu.id] = sdu.digest
            pdu = pdcp_tx(self.pdcp, sdu)
            if self.controller.route(pdu) is Link.LTE:
                self.lte.enqueue(pdu.to_bytes(), tag=sdu.id)
            else:
                frame = encap_eth(
                    pdu.to_bytes(), self._dst_mac, self._src_mac, self.scenario.wifi.ethertype
                )
                self.wifi.enqueue(frame)

        for delivery in lte_tick(self.lte, t):
            self._send_lte(delivery, t)

        if self.reorder is not None:
            for pdu in self.reorder.flush(float(t)):
                self._sink(pdu, float(t))

    def _send_lte(self, delivery: LteDelivery, now: int) -> None:
        if delivery.lost:
            self.summary.lte_tb_lost += len(delivery.completed)
            return
        self._lte_in_transit += len(delivery.completed)
        event = self.env.timeout(delivery.arrival_ms - now, value=delivery)
        event.callbacks.append(self._on_lte_block)

    # -- UE -------------------------------------------------------------------

    def _on_lte_block(self, event: simpy.events.Event) -> None:
        delivery: LteDelivery = event.value
        now = float(self.env.now)
        self._lte_in_transit -= len(delivery.completed)
        units = self.reassembler.push(decode(delivery.data))
        self.summary.framing_discarded += len(delivery.completed) - len(units)
        for unit in units:
            self._merge(pdcp_rx(unit, now), now)

    def _on_wifi_frame(self, frame: bytes, arrival: float) -> None:
        try:
            eth = decap_eth(frame, self.scenario.wifi.ethertype)
        except WrongEthertypeError:
            logger.debug("Ignoring frame with foreign ethertype")
            return
        self._merge(pdcp_rx(eth.payload, arrival), arrival)

    def _merge(self, pdu: PdcpPdu, now: float) -> None:
        self._interval.raw_arrivals += 1
        if self._raw_ooo.observe(sdu_id(pdu.payload)):
            self._interval.raw_ooo += 1
        if self.reorder is None:
            self._sink(pdu, now)
            return
        for released in self.reorder.feed(pdu, now):
            self._sink(released, now)

    def _sink(self, pdu: PdcpPdu, now: float) -> None:
        ident = sdu_id(pdu.payload)
        expected = self._digests.pop(ident, None)
        if expected is None or hashlib.sha256(pdu.payload).digest() != expected:
            self.summary.integrity_failures += 1
            logger.warning("SDU %d failed the integrity check at %.3f ms", ident, now)
        self.summary.delivered += 1
        self._interval.sink_bytes += len(pdu.payload)
        self._interval.sink_arrivals += 1
        if self._sink_ooo.observe(ident):
            self._interval.sink_ooo += 1

    # -- metrics ----------------------------------------------------------------

    def _close_interval(self, t: int) -> None:
        interval = self._interval
        interval.end_ms = t
        span_s = (t - interval.start_ms) / 1000.0
        lte_bytes = self.lte.stats.link_bytes
        wifi_bytes = self.wifi.stats.link_bytes
        skipped = self.reorder.stats.skipped_lost if self.reorder else 0
        late = self.reorder.stats.late_dropped if self.reorder else 0

        self.records.append(
            MetricsRecord(
                t_s=t / 1000.0,
                offered_bps=interval.offered_bytes * 8 / span_s,
                lte_tx_bps=(lte_bytes - self._prev_lte_bytes) * 8 / span_s,
                wifi_tx_bps=(wifi_bytes - self._prev_wifi_bytes) * 8 / span_s,
                sink_goodput_bps=interval.sink_bytes * 8 / span_s,
                ooo_raw_fraction=interval.raw_ooo / interval.raw_arrivals
                if interval.raw_arrivals
                else 0.0,
                ooo_sink_fraction=interval.sink_ooo / interval.sink_arrivals
                if interval.sink_arrivals
                else 0.0,
                reorder_skipped=skipped - self._prev_skipped,
                reorder_late=late - self._prev_late,
                q_lte_pkts=self.lte.queue_len(),
                q_wifi_pkts=self.wifi.queue_len(),
                mode=str(self.controller.mode),
                share_wifi=self.controller.share_wifi,
                l_i_bytes=self.controller.state.l_i,
            )
        )
        self.counts.append(interval)
        self._prev_lte_bytes = lte_bytes
        self._prev_wifi_bytes = wifi_bytes
        self._prev_skipped = skipped
        self._prev_late = late
        self._interval = IntervalCounts(start_ms=t, end_ms=t)

    def _finalize(self) -> None:
        end = float(self.duration_ms)
        if self.reorder is not None:
            for pdu in self.reorder.flush(end, final=True):
                self._sink(pdu, end)
        if self._interval.start_ms < self.duration_ms:
            self._close_interval(self.duration_ms)

        summary = self.summary
        summary.wifi_lost = self.wifi.stats.frames_lost
        summary.in_flight_at_end = (
            self.lte.queue_len() + self._lte_in_transit + self.wifi.queue_len() + self.wifi.in_transit
        )
        if self.reorder is not None:
            summary.late_dropped = self.reorder.stats.late_dropped
            summary.duplicates = self.reorder.stats.duplicates
            summary.skipped_lost = self.reorder.stats.skipped_lost
        stats = self.reassembler.stats
        summary.reassembly = {
            "delivered": stats.delivered,
            "sn_gaps": stats.sn_gaps,
            "discarded_partials": stats.discarded_partials,
            "discarded_fragments": stats.discarded_fragments,
        }
        warmup_ms = int(round(self.scenario.warmup_s * 1000))
        for key, value in summarize(self.counts, warmup_ms).items():
            setattr(summary, key, value)

    def run(self) -> MetricsReport:
        if self._finished:
            raise RuntimeError("Simulator.run() may only be called once")
        logger.info(
            "Running %s: %.1f s, seed %d, reorder %s",
            self.scenario.name,
            self.scenario.duration_s,
            self.scenario.seed,
            "on" if self.reorder else "off",
        )
        self.env.process(self._clock())
        self.env.run(until=self.duration_ms)
        self._finalize()
        self._finished = True

        summary = self.summary
        if summary.unaccounted:
            logger.warning("Accounting ledger off by %d SDUs", summary.unaccounted)
        logger.info(
            "Finished %s: %d sourced, %d delivered, goodput %.2f Mbps, final mode %s",
            self.scenario.name,
            summary.sourced,
            summary.delivered,
            summary.mean_goodput_bps / 1e6,
            self.controller.mode,
        )
        return MetricsReport(records=self.records, summary=summary)


def run(scenario: Scenario) -> MetricsReport:
    """Simulate *scenario* and return its per-interval records and summary."""
    return Simulator(scenario).run()
