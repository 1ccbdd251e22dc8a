"""UE-side merge point: in-order release of PDCP PDUs from both links.

PDUs are held in an SN-keyed store until the next expected SN shows up.
The window moves past a missing SN when the store outgrows the window or
its oldest entry has waited longer than the hold timer. Anything arriving
behind the window is dropped and counted, never delivered out of order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from lwasim.pdcp.entity import SN_MODULUS, PdcpPdu

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_SIZE = 64
DEFAULT_HOLD_TIMER_MS = 20.0

_HALF_RANGE = SN_MODULUS // 2


def sn_after(a: int, b: int) -> bool:
    """True when *b* lies in the forward half-range of *a*."""
    if not (0 <= a < SN_MODULUS and 0 <= b < SN_MODULUS):
        raise ValueError(f"SNs must lie in 0..{SN_MODULUS - 1}, got {a} and {b}")
    return 0 < (b - a) % SN_MODULUS < _HALF_RANGE


@dataclass
class ReorderStats:
    delivered: int = 0
    skipped_lost: int = 0
    late_dropped: int = 0
    duplicates: int = 0
    occupancy: int = 0


@dataclass
class ReorderState:
    """Expected SN, held PDUs (with arrival time) and counters."""

    window_size: int = DEFAULT_WINDOW_SIZE
    hold_timer_ms: float = DEFAULT_HOLD_TIMER_MS
    expected_sn: int | None = None
    buffer: dict[int, tuple[PdcpPdu, float]] = field(default_factory=dict)
    stats: ReorderStats = field(default_factory=ReorderStats)

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")
        if self.window_size >= _HALF_RANGE:
            raise ValueError(f"window_size must be < {_HALF_RANGE}")
        if self.hold_timer_ms <= 0:
            raise ValueError(f"hold_timer_ms must be > 0, got {self.hold_timer_ms}")


def _release_run(state: ReorderState) -> list[PdcpPdu]:
    released: list[PdcpPdu] = []
    assert state.expected_sn is not None
    while state.expected_sn in state.buffer:
        pdu, _ = state.buffer.pop(state.expected_sn)
        released.append(pdu)
        state.expected_sn = (state.expected_sn + 1) % SN_MODULUS
    state.stats.delivered += len(released)
    return released


def _advance(state: ReorderState) -> list[PdcpPdu]:
    """Jump to the smallest held SN, counting every SN passed over."""
    assert state.expected_sn is not None
    expected = state.expected_sn
    target = min(state.buffer, key=lambda sn: (sn - expected) % SN_MODULUS)
    skipped = (target - expected) % SN_MODULUS
    state.stats.skipped_lost += skipped
    state.expected_sn = target
    logger.debug("Reorder window advanced %d -> %d (%d skipped)", expected, target, skipped)
    return _release_run(state)


def _must_advance(state: ReorderState, now: float) -> bool:
    if not state.buffer:
        return False
    if len(state.buffer) > state.window_size:
        return True
    oldest = min(arrival for _, arrival in state.buffer.values())
    return now - oldest > state.hold_timer_ms


def feed(state: ReorderState, pdu: PdcpPdu, now: float) -> list[PdcpPdu]:
    """Accept one PDU and return whatever it unblocks, in SN order."""
    if state.expected_sn is None:
        state.expected_sn = pdu.sn

    released: list[PdcpPdu] = []
    sn = pdu.sn
    if sn == state.expected_sn:
        state.expected_sn = (sn + 1) % SN_MODULUS
        state.stats.delivered += 1
        released.append(pdu)
        released.extend(_release_run(state))
    elif not sn_after(state.expected_sn, sn):
        state.stats.late_dropped += 1
    elif sn in state.buffer:
        state.stats.duplicates += 1
    else:
        state.buffer[sn] = (pdu, now)

    while _must_advance(state, now):
        released.extend(_advance(state))
    state.stats.occupancy = len(state.buffer)
    return released


def flush(state: ReorderState, now: float, final: bool = False) -> list[PdcpPdu]:
    """Apply the hold timer without an arrival; *final* drains everything."""
    released: list[PdcpPdu] = []
    if final:
        while state.buffer:
            released.extend(_advance(state))
    else:
        while _must_advance(state, now):
            released.extend(_advance(state))
    state.stats.occupancy = len(state.buffer)
    return released


class ReorderBuffer:
    """Object wrapper over :class:`ReorderState` used by the simulator."""

    def __init__(
        self,
        window_size: int = DEFAULT_WINDOW_SIZE,
        hold_timer_ms: float = DEFAULT_HOLD_TIMER_MS,
    ) -> None:
        self.state = ReorderState(window_size=window_size, hold_timer_ms=hold_timer_ms)

    @property
    def stats(self) -> ReorderStats:
        return self.state.stats

    def feed(self, pdu: PdcpPdu, now: float) -> list[PdcpPdu]:
        return feed(self.state, pdu, now)

    def flush(self, now: float, final: bool = False) -> list[PdcpPdu]:
        return flush(self.state, now, final=final)
