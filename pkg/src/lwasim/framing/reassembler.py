"""Receiver side: rebuild upper-layer units from framed PDUs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from lwasim.framing.codec import SN_MODULUS, FramedPdu

logger = logging.getLogger(__name__)


@dataclass
class ReassemblyStats:
    """Counters kept across the lifetime of a reassembler."""

    delivered: int = 0
    sn_gaps: int = 0
    discarded_partials: int = 0  # pending units thrown away on a gap
    discarded_fragments: int = 0  # continuation segments whose head was lost


@dataclass
class ReassemblyState:
    """Receiver state: expected SN and the unit being rebuilt."""

    expected_sn: int | None = None
    partial: bytearray = field(default_factory=bytearray)
    partial_open: bool = False

    def reset_partial(self) -> None:
        self.partial.clear()
        self.partial_open = False


class Reassembler:
    """Feeds framed PDUs through the reassembly state machine.

    No retransmission: an SN gap drops whatever was pending and any
    continuation segment that follows the gap.
    """

    def __init__(self) -> None:
        self.state = ReassemblyState()
        self.stats = ReassemblyStats()

    def push(self, pdu: FramedPdu) -> list[bytes]:
        return reassemble(self.state, pdu, self.stats)


def reassemble(
    state: ReassemblyState,
    pdu: FramedPdu,
    stats: ReassemblyStats | None = None,
) -> list[bytes]:
    """Process one PDU and return the units it completed, in order."""
    stats = stats if stats is not None else ReassemblyStats()
    header = pdu.header

    if state.expected_sn is not None and header.sn != state.expected_sn:
        stats.sn_gaps += 1
        if state.partial_open:
            stats.discarded_partials += 1
            logger.debug(
                "SN gap (expected %d, got %d): dropping %d pending bytes",
                state.expected_sn,
                header.sn,
                len(state.partial),
            )
        state.reset_partial()

    completed: list[bytes] = []
    segments = pdu.segments()
    last = len(segments) - 1

    for i, segment in enumerate(segments):
        if i == 0 and header.start_frag:
            if not state.partial_open:
                # Head of this unit is gone; nothing to attach to.
                stats.discarded_fragments += 1
                continue
            state.partial.extend(segment)
        else:
            if state.partial_open:
                stats.discarded_partials += 1
            state.partial = bytearray(segment)
            state.partial_open = True

        if i == last and header.end_frag:
            continue
        completed.append(bytes(state.partial))
        state.reset_partial()

    state.expected_sn = (header.sn + 1) % SN_MODULUS
    stats.delivered += len(completed)
    return completed
