"""Datagram WiFi link: one transmitter, independent per-frame delays.

Frames wait in a ``simpy.Store`` and are serialized one at a time at
``rate_bps``. Once on the air each frame gets its own delay sample, so
arrivals may come out of send order.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Generator
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
import simpy

from lwasim.channel.delays import DelayModel, make_delay

if TYPE_CHECKING:
    from lwasim.config.settings import WifiLinkConfig

logger = logging.getLogger(__name__)

ReceiveCallback = Callable[[bytes, float], None]


@dataclass
class WifiStats:
    frames_sent: int = 0
    frames_lost: int = 0
    link_bytes: int = 0


class WifiLink:
    """AP-side WiFi queue and transmitter.

    Without an *env* the link only offers :func:`wifi_send`; with one it
    runs a transmitter process that drains :attr:`store` and hands
    arriving frames to *on_receive*.
    """

    def __init__(
        self,
        config: WifiLinkConfig,
        rng: np.random.Generator,
        loss_rng: np.random.Generator | None = None,
        env: simpy.Environment | None = None,
        on_receive: ReceiveCallback | None = None,
        delay: DelayModel | None = None,
    ) -> None:
        self.config = config
        self.rng = rng
        self.loss_rng = loss_rng if loss_rng is not None else rng
        self.delay = delay if delay is not None else make_delay(config.one_way_delay)
        self.stats = WifiStats()
        self.env = env
        self.on_receive = on_receive
        self.in_transit = 0
        self.store: simpy.Store | None = None
        if env is not None:
            self.store = simpy.Store(env)
            env.process(self._transmitter())

    def serialization_ms(self, nbytes: int) -> float:
        return nbytes * 8 / self.config.rate_bps * 1000.0

    def enqueue(self, frame: bytes) -> None:
        if self.store is None:
            raise RuntimeError("WiFi link has no simulation environment")
        self.store.put(frame)

    def queue_len(self) -> int:
        """Frames waiting for the transmitter."""
        return len(self.store.items) if self.store is not None else 0

    def _transmitter(self) -> Generator[Any, Any, None]:
        assert self.env is not None and self.store is not None
        while True:
            frame = yield self.store.get()
            now = self.env.now
            arrival = wifi_send(self, frame, now)
            if arrival is not None:
                self.in_transit += 1
                event = self.env.timeout(arrival - now, value=(frame, arrival))
                event.callbacks.append(self._arrive)
            yield self.env.timeout(self.serialization_ms(len(frame)))

    def _arrive(self, event: simpy.events.Event) -> None:
        frame, arrival = event.value
        self.in_transit -= 1
        if self.on_receive is not None:
            self.on_receive(frame, arrival)


def wifi_send(link: WifiLink, frame: bytes, now: float) -> float | None:
    """Arrival time of *frame* sent at *now*, or None when it is lost."""
    link.stats.frames_sent += 1
    link.stats.link_bytes += len(frame)
    if link.config.loss_p > 0 and link.loss_rng.random() < link.config.loss_p:
        link.stats.frames_lost += 1
        logger.debug("WiFi frame of %d B dropped at %.3f ms", len(frame), now)
        return None
    return now + link.serialization_ms(len(frame)) + link.delay.sample(link.rng)
