"""Bit-exact codec for the segmentation/concatenation frame header.

Layout (all multi-byte fields big-endian)::

    byte 0      6 reserved bits (zero) | FI: start_frag, end_frag
    byte 1      SN (7 bits, high bit zero)
    2 bytes/LI  (LI << 1) | E, E = 1 on every descriptor except the last
    payload     concatenated segments, sum(LI) bytes
    padding     zero bytes up to the transport block size
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

FIXED_HEADER_LEN = 2
DESCRIPTOR_LEN = 2
SN_MODULUS = 128
MAX_LI = 0x7FFF
MIN_TB_SIZE = FIXED_HEADER_LEN + DESCRIPTOR_LEN + 1

_DESCRIPTOR = struct.Struct(">H")


class FramingError(ValueError):
    """A byte sequence is not a valid framed PDU."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class TruncatedError(FramingError):
    """Descriptor chain or payload runs past the end of the buffer."""


class ZeroLIError(FramingError):
    """A length indicator of zero was found."""


@dataclass
class FrameHeader:
    """Header of one framed PDU."""

    start_frag: bool
    end_frag: bool
    sn: int
    lis: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 0 <= self.sn < SN_MODULUS:
            raise ValueError(f"sn out of range: {self.sn}")
        if not self.lis:
            raise ValueError("header needs at least one length indicator")
        for li in self.lis:
            if not 1 <= li <= MAX_LI:
                raise ValueError(f"length indicator out of range: {li}")

    @property
    def fi(self) -> int:
        """Two-bit framing info, start_frag in the high bit."""
        return (int(self.start_frag) << 1) | int(self.end_frag)

    @property
    def encoded_len(self) -> int:
        return FIXED_HEADER_LEN + DESCRIPTOR_LEN * len(self.lis)


@dataclass
class FramedPdu:
    """Transport-block-sized unit: header, concatenated segments, padding."""

    header: FrameHeader
    payload: bytes
    padding_len: int = 0

    def __post_init__(self) -> None:
        if len(self.payload) != sum(self.header.lis):
            raise ValueError(
                f"payload length {len(self.payload)} != sum of LIs {sum(self.header.lis)}"
            )
        if self.padding_len < 0:
            raise ValueError("padding_len must be >= 0")

    @property
    def size(self) -> int:
        """Encoded size in bytes, padding included."""
        return self.header.encoded_len + len(self.payload) + self.padding_len

    def segments(self) -> list[bytes]:
        """Split the payload back into its LI-delimited segments."""
        out = []
        pos = 0
        for li in self.header.lis:
            out.append(self.payload[pos:pos + li])
            pos += li
        return out


def encode(pdu: FramedPdu) -> bytes:
    """Serialize a framed PDU, padding included."""
    header = pdu.header
    parts = [bytes((header.fi, header.sn))]
    last = len(header.lis) - 1
    for i, li in enumerate(header.lis):
        extension = 0 if i == last else 1
        parts.append(_DESCRIPTOR.pack((li << 1) | extension))
    parts.append(pdu.payload)
    parts.append(bytes(pdu.padding_len))
    return b"".join(parts)


def decode(data: bytes) -> FramedPdu:
    """Parse a framed PDU. Bytes past the last segment count as padding.

    Reserved bits in the first byte and the high bit of the SN byte are
    ignored.
    """
    if len(data) < FIXED_HEADER_LEN + DESCRIPTOR_LEN:
        raise TruncatedError("buffer shorter than the minimal header", len(data))

    fi = data[0] & 0x03
    sn = data[1] & 0x7F

    lis: list[int] = []
    offset = FIXED_HEADER_LEN
    while True:
        if offset + DESCRIPTOR_LEN > len(data):
            raise TruncatedError("descriptor chain runs past end of buffer", offset)
        (descriptor,) = _DESCRIPTOR.unpack_from(data, offset)
        li = descriptor >> 1
        if li == 0:
            raise ZeroLIError("zero length indicator", offset)
        lis.append(li)
        offset += DESCRIPTOR_LEN
        if not descriptor & 1:
            break

    payload_len = sum(lis)
    if offset + payload_len > len(data):
        raise TruncatedError(
            f"payload of {payload_len} bytes exceeds buffer", offset
        )

    header = FrameHeader(
        start_frag=bool(fi & 0x02),
        end_frag=bool(fi & 0x01),
        sn=sn,
        lis=lis,
    )
    return FramedPdu(
        header=header,
        payload=bytes(data[offset:offset + payload_len]),
        padding_len=len(data) - offset - payload_len,
    )
