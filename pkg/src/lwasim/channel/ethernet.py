"""Ethernet-style encapsulation of PDCP PDUs on the WiFi path."""

from __future__ import annotations

import struct
from dataclasses import dataclass

ETH_HLEN = 14
MAC_LEN = 6
DEFAULT_ETHERTYPE = 0x88B5

_HEADER = struct.Struct(">6s6sH")


class EthernetError(ValueError):
    """Base for WiFi frame decoding failures."""


class EthTruncatedError(EthernetError):
    """Frame shorter than the header plus one payload byte."""


class WrongEthertypeError(EthernetError):
    """Frame is not addressed to the aggregation adaptation; ignore it."""

    def __init__(self, ethertype: int, expected: int):
        super().__init__(f"ethertype 0x{ethertype:04X}, expected 0x{expected:04X}")
        self.ethertype = ethertype
        self.expected = expected


@dataclass(frozen=True)
class EthFrame:
    dst_mac: bytes
    src_mac: bytes
    ethertype: int
    payload: bytes

    def __post_init__(self) -> None:
        if len(self.dst_mac) != MAC_LEN or len(self.src_mac) != MAC_LEN:
            raise ValueError("MAC addresses must be 6 bytes")
        if not 0 <= self.ethertype <= 0xFFFF:
            raise ValueError(f"ethertype out of range: {self.ethertype}")


def parse_mac(text: str) -> bytes:
    """``"02:00:00:00:00:01"`` -> 6 bytes."""
    parts = text.replace("-", ":").split(":")
    if len(parts) != MAC_LEN:
        raise ValueError(f"invalid MAC address: {text!r}")
    try:
        return bytes(int(p, 16) for p in parts)
    except ValueError:
        raise ValueError(f"invalid MAC address: {text!r}") from None


def encap_eth(
    pdu_bytes: bytes,
    dst: bytes,
    src: bytes,
    ethertype: int = DEFAULT_ETHERTYPE,
) -> bytes:
    frame = EthFrame(dst_mac=dst, src_mac=src, ethertype=ethertype, payload=pdu_bytes)
    return _HEADER.pack(frame.dst_mac, frame.src_mac, frame.ethertype) + frame.payload


def decap_eth(data: bytes, expected_ethertype: int | None = DEFAULT_ETHERTYPE) -> EthFrame:
    """Strip the 14-byte header.

    Pass ``expected_ethertype=None`` to accept any ethertype.
    """
    if len(data) < ETH_HLEN + 1:
        raise EthTruncatedError(f"frame needs at least {ETH_HLEN + 1} bytes, got {len(data)}")
    dst, src, ethertype = _HEADER.unpack_from(data)
    if expected_ethertype is not None and ethertype != expected_ethertype:
        raise WrongEthertypeError(ethertype, expected_ethertype)
    return EthFrame(dst_mac=dst, src_mac=src, ethertype=ethertype, payload=bytes(data[ETH_HLEN:]))
