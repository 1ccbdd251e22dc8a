"""Load-threshold mode switching and backlog-driven split-ratio control.

Offered bytes are summed over a load window (100 frames by default). At
each window boundary the total is compared with the threshold: below it
the bearer runs in Switch mode on a single link, at or above it in Lwa
mode, where PDUs are split between the links according to ``share_wifi``.
In Lwa mode the queue length of each link is sampled every sensing period
and the share moves away from whichever link's queue keeps growing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from lwasim.flowctl.policies import RatioPolicy, RatioTuning, get_policy
from lwasim.flowctl.types import FRAME_MS, BacklogDelta, Link, Mode
from lwasim.pdcp.entity import PdcpPdu

if TYPE_CHECKING:
    from lwasim.config.settings import ControllerConfig

logger = logging.getLogger(__name__)

DEFAULT_SHARE = 0.5
# Error-diffusion start value: share 0.5 then routes WiFi first.
INITIAL_CREDIT = 0.5


@dataclass
class ControllerState:
    mode: Mode = Mode.SWITCH
    l_i: int = 0
    l_th: float = 1.4e6
    share_wifi: float = DEFAULT_SHARE
    wrr_credit: float = INITIAL_CREDIT
    q_lte_prev: int | None = None
    q_wifi_prev: int | None = None
    frame_clock: int = 0
    base_b: float = 1000.0
    switch_link: Link = Link.LTE
    window_start: int = 0
    last_sense_frame: int | None = None
    last_window_load: int = 0
    initial_share: float = DEFAULT_SHARE

    def __post_init__(self) -> None:
        if self.l_th <= 0:
            raise ValueError(f"l_th must be > 0, got {self.l_th}")
        if not 0.0 <= self.share_wifi <= 1.0:
            raise ValueError(f"share_wifi must lie in [0, 1], got {self.share_wifi}")


def compute_threshold(peak_lte_bps: float, factor: float, window_s: float = 1.0) -> float:
    """Bytes per load window that trigger Lwa mode."""
    if not 0.0 < factor <= 1.0:
        raise ValueError(f"threshold factor must lie in (0, 1], got {factor}")
    if peak_lte_bps <= 0:
        raise ValueError(f"peak_lte_bps must be > 0, got {peak_lte_bps}")
    if window_s <= 0:
        raise ValueError(f"window_s must be > 0, got {window_s}")
    return peak_lte_bps * factor * window_s / 8.0


def select_mode(
    l_i: float,
    l_th: float,
    current: Mode | None = None,
    hysteresis: float = 0.0,
) -> Mode:
    """Switch iff the window load is below the threshold.

    With a *hysteresis* margin, leaving Lwa mode needs the load to drop
    below ``l_th * (1 - hysteresis)``.
    """
    if l_th <= 0:
        raise ValueError(f"l_th must be > 0, got {l_th}")
    if current is Mode.LWA and hysteresis > 0.0:
        return Mode.SWITCH if l_i < l_th * (1.0 - hysteresis) else Mode.LWA
    return Mode.SWITCH if l_i < l_th else Mode.LWA


def enter_mode(state: ControllerState, mode: Mode) -> bool:
    """Apply *mode*; returns True when it changed.

    Entering Lwa mode resets the split to ``initial_share`` (1:1 unless
    configured otherwise) and discards the sensing snapshot so the first
    sample after entry only initializes it.
    """
    if mode is state.mode:
        return False
    previous = state.mode
    state.mode = mode
    if mode is Mode.LWA:
        state.share_wifi = state.initial_share
        state.wrr_credit = INITIAL_CREDIT
    state.q_lte_prev = None
    state.q_wifi_prev = None
    state.last_sense_frame = None
    logger.info(
        "Mode %s -> %s at frame %d (window load %d B, threshold %.0f B)",
        previous,
        mode,
        state.frame_clock,
        state.last_window_load,
        state.l_th,
    )
    return True


def accumulate_load(
    state: ControllerState,
    nbytes: int,
    frame_clock: int,
    load_frames: int = 100,
    hysteresis: float = 0.0,
) -> Mode | None:
    """Add offered bytes; at each window boundary decide the mode.

    The window that just ended is evaluated before *nbytes* is counted, so
    bytes offered at a boundary belong to the new window. Returns the
    decision when a window closed, otherwise None.
    """
    if frame_clock < state.frame_clock:
        raise ValueError(f"frame_clock went backwards: {frame_clock} < {state.frame_clock}")
    if nbytes < 0:
        raise ValueError(f"nbytes must be >= 0, got {nbytes}")
    state.frame_clock = frame_clock

    decision: Mode | None = None
    window_load = _close_window(state, frame_clock, load_frames)
    if window_load is not None:
        decision = select_mode(window_load, state.l_th, state.mode, hysteresis)
        enter_mode(state, decision)

    state.l_i += nbytes
    return decision


def _close_window(state: ControllerState, frame_clock: int, load_frames: int) -> int | None:
    if frame_clock - state.window_start < load_frames:
        return None
    window_load = state.l_i
    state.last_window_load = window_load
    state.window_start += (frame_clock - state.window_start) // load_frames * load_frames
    state.l_i = 0
    return window_load


def sense_links(
    state: ControllerState,
    q_lte_now: int,
    q_wifi_now: int,
    frame_clock: int,
    sensing_frames: int = 10,
) -> BacklogDelta | None:
    """Queue-length change since the previous sample, once per period."""
    if state.last_sense_frame is None or state.q_lte_prev is None or state.q_wifi_prev is None:
        state.q_lte_prev = q_lte_now
        state.q_wifi_prev = q_wifi_now
        state.last_sense_frame = frame_clock
        return None
    if frame_clock - state.last_sense_frame < sensing_frames:
        return None

    delta = BacklogDelta(
        d_lte=q_lte_now - state.q_lte_prev,
        d_wifi=q_wifi_now - state.q_wifi_prev,
        q_lte=q_lte_now,
        q_wifi=q_wifi_now,
    )
    state.q_lte_prev = q_lte_now
    state.q_wifi_prev = q_wifi_now
    state.last_sense_frame = frame_clock
    return delta


def update_ratio(
    state: ControllerState,
    delta: BacklogDelta,
    policy: RatioPolicy | None = None,
    max_step: float = 0.25,
    deadband_pkts: int = 0,
    standing_pkts: int = 4,
) -> float:
    """Move ``share_wifi`` according to *policy* (additive by default)."""
    policy = policy or get_policy("additive")
    tuning = RatioTuning(
        base_b=state.base_b,
        max_step=max_step,
        deadband_pkts=deadband_pkts,
        standing_pkts=standing_pkts,
    )
    before = state.share_wifi
    state.share_wifi = min(1.0, max(0.0, policy(before, delta, tuning)))
    if state.share_wifi != before:
        logger.debug(
            "share_wifi %.3f -> %.3f (d_lte=%+d, d_wifi=%+d)",
            before,
            state.share_wifi,
            delta.d_lte,
            delta.d_wifi,
        )
    return state.share_wifi


def route_packet(state: ControllerState, pdu: PdcpPdu | None = None) -> Link:
    """Pick the link for the next PDU.

    Lwa mode uses error diffusion, so any prefix of N packets sends
    within one packet of ``N * share_wifi`` to WiFi.
    """
    if state.mode is Mode.SWITCH:
        return state.switch_link
    state.wrr_credit += state.share_wifi
    if state.wrr_credit >= 1.0:
        state.wrr_credit -= 1.0
        return Link.WIFI
    return Link.LTE


class FlowController:
    """Controller bound to a :class:`ControllerConfig`.

    The simulator calls :meth:`on_tick` once per millisecond with the bytes
    offered in that tick and the current queue lengths, then
    :meth:`route` for each PDU.
    """

    def __init__(self, config: ControllerConfig) -> None:
        self.config = config
        window_s = config.load_frames * FRAME_MS / 1000.0
        self.state = ControllerState(
            l_th=compute_threshold(config.peak_lte_bps, config.factor, window_s),
            base_b=config.base_b,
            switch_link=Link(config.switch_link),
            share_wifi=config.initial_share,
            initial_share=config.initial_share,
        )
        self.policy = get_policy(config.policy)
        if config.split == "always":
            enter_mode(self.state, Mode.LWA)

    @property
    def mode(self) -> Mode:
        return self.state.mode

    @property
    def share_wifi(self) -> float:
        return self.state.share_wifi

    def on_tick(self, now_ms: int, nbytes: int, q_lte: int, q_wifi: int) -> None:
        frame = now_ms // FRAME_MS
        if self.config.split == "dynamic":
            accumulate_load(
                self.state, nbytes, frame, self.config.load_frames, self.config.hysteresis
            )
        else:
            # Pinned mode: keep the load trace, never decide.
            self.state.frame_clock = frame
            _close_window(self.state, frame, self.config.load_frames)
            self.state.l_i += nbytes

        if self.state.mode is Mode.LWA and now_ms % FRAME_MS == 0:
            delta = sense_links(self.state, q_lte, q_wifi, frame, self.config.sensing_frames)
            if delta is not None:
                update_ratio(
                    self.state,
                    delta,
                    self.policy,
                    max_step=self.config.max_step,
                    deadband_pkts=self.config.deadband_pkts,
                    standing_pkts=self.config.standing_pkts,
                )

    def route(self, pdu: PdcpPdu | None = None) -> Link:
        return route_packet(self.state, pdu)
