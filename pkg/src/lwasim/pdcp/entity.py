"""12-bit PDCP sequence numbering and the 2-byte data PDU header.

Ciphering and integrity protection are not applied: PDUs travel the
transparent path.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Protocol

SN_BITS = 12
SN_MODULUS = 1 << SN_BITS
HEADER_LEN = 2

_HEADER = struct.Struct(">H")


class PdcpTruncatedError(ValueError):
    """Input too short to hold a header and at least one payload byte."""


class SduLike(Protocol):
    payload: bytes
    created_at: float


@dataclass
class PdcpPdu:
    """An SDU tagged with its PDCP sequence number."""

    sn: int
    payload: bytes
    enqueue_time: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.sn < SN_MODULUS:
            raise ValueError(f"PDCP SN out of range: {self.sn}")
        if not self.payload:
            raise ValueError("PDCP payload must be non-empty")

    def to_bytes(self) -> bytes:
        """Serialize as 4 zero bits, 12-bit SN, then the payload."""
        return _HEADER.pack(self.sn) + self.payload

    def __len__(self) -> int:
        return HEADER_LEN + len(self.payload)


@dataclass
class PdcpTxState:
    """Transmit-side SN counter."""

    next_sn: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.next_sn < SN_MODULUS:
            raise ValueError(f"next_sn out of range: {self.next_sn}")


def pdcp_tx(state: PdcpTxState, sdu: SduLike) -> PdcpPdu:
    """Number *sdu* with the next SN and advance the counter."""
    pdu = PdcpPdu(sn=state.next_sn, payload=sdu.payload, enqueue_time=sdu.created_at)
    state.next_sn = (state.next_sn + 1) % SN_MODULUS
    return pdu


def pdcp_rx(data: bytes, now: float = 0.0) -> PdcpPdu:
    """Strip the header; reserved bits are ignored."""
    if len(data) < HEADER_LEN + 1:
        raise PdcpTruncatedError(f"PDCP PDU needs at least 3 bytes, got {len(data)}")
    (word,) = _HEADER.unpack_from(data)
    return PdcpPdu(sn=word & (SN_MODULUS - 1), payload=bytes(data[HEADER_LEN:]), enqueue_time=now)
