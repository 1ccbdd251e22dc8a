"""TTI-scheduled, in-order LTE downlink.

Each 10 ms frame offers ``used_subframes_per_frame`` transport blocks, one
per 1 ms subframe from subframe 0. A capacity scale below 1 earns
fractional subframe credit per frame; whole subframes are spent and the
remainder carries over, so 0.3 x 8 subframes averages 2.4 per frame.
"""

from __future__ import annotations

import logging
from collections.abc import Hashable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from lwasim.channel.delays import DelayModel, make_delay
from lwasim.flowctl.types import SUBFRAMES_PER_FRAME
from lwasim.framing.codec import encode
from lwasim.framing.segmenter import SduQueue

if TYPE_CHECKING:
    from lwasim.config.settings import LteLinkConfig

logger = logging.getLogger(__name__)

_CREDIT_EPS = 1e-9


@dataclass
class LteStats:
    tbs_sent: int = 0
    tbs_lost: int = 0
    link_bytes: int = 0  # encoded bytes excluding padding


@dataclass
class LteDelivery:
    """One transport block on its way to the UE."""

    sent_ms: float
    arrival_ms: float
    data: bytes
    completed: list[Hashable] = field(default_factory=list)
    lost: bool = False


class LteLink:
    """eNB-side LTE queue, segmenter and subframe scheduler."""

    def __init__(
        self,
        config: LteLinkConfig,
        rng: np.random.Generator,
        loss_rng: np.random.Generator | None = None,
        delay: DelayModel | None = None,
    ) -> None:
        self.config = config
        self.rng = rng
        self.loss_rng = loss_rng if loss_rng is not None else rng
        self.delay = delay if delay is not None else make_delay(config.one_way_delay)
        self.queue = SduQueue(max_concat=config.max_concat)
        self.stats = LteStats()
        self._credit = 0.0
        self._usable = config.used_subframes_per_frame
        self._last_arrival = float("-inf")

    def enqueue(self, pdu_bytes: bytes, tag: Hashable = None) -> None:
        self.queue.push(pdu_bytes, tag)

    def queue_len(self) -> int:
        return len(self.queue)

    def _start_frame(self, now_ms: int) -> None:
        scale = self.config.capacity_scale(now_ms / 1000.0)
        self._credit += self.config.used_subframes_per_frame * scale
        self._usable = min(self.config.used_subframes_per_frame, int(self._credit + _CREDIT_EPS))
        self._credit = max(0.0, self._credit - self._usable)

    def tick(self, now_ms: int) -> LteDelivery | None:
        """Serve one subframe; returns the block sent, if any."""
        subframe = now_ms % SUBFRAMES_PER_FRAME
        if subframe == 0:
            self._start_frame(now_ms)
        if subframe >= self._usable or not self.queue:
            return None

        result = self.queue.segmenter.build(self.queue, self.config.tb_bytes_per_tti)
        data = encode(result.pdu)
        # FIFO: a block never overtakes the one sent before it.
        arrival = max(now_ms + self.delay.sample(self.rng), self._last_arrival)
        self._last_arrival = arrival

        lost = self.config.tb_loss_p > 0 and self.loss_rng.random() < self.config.tb_loss_p
        self.stats.tbs_sent += 1
        self.stats.link_bytes += result.pdu.size - result.pdu.padding_len
        if lost:
            self.stats.tbs_lost += 1
            logger.debug("LTE TB SN %d lost at %d ms", result.pdu.header.sn, now_ms)
        return LteDelivery(
            sent_ms=float(now_ms),
            arrival_ms=arrival,
            data=data,
            completed=result.completed,
            lost=lost,
        )


def lte_tick(link: LteLink, now_ms: int) -> list[LteDelivery]:
    """Advance *link* by one subframe; at most one block per subframe."""
    delivery = link.tick(now_ms)
    return [delivery] if delivery is not None else []
