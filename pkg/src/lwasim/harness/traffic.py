"""Open-loop traffic source feeding PDCP at the eNB."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Protocol

import numpy as np

ID_HEADER = struct.Struct(">Q")


class RateProfile(Protocol):
    def rate_at(self, t_s: float) -> float: ...


@dataclass(frozen=True)
class Sdu:
    """One upper-layer datagram: 8-byte big-endian id, then filler."""

    id: int
    payload: bytes
    created_at: float

    @property
    def digest(self) -> bytes:
        return hashlib.sha256(self.payload).digest()


def sdu_id(payload: bytes) -> int:
    """Datagram counter carried in the first 8 payload bytes."""
    if len(payload) < ID_HEADER.size:
        raise ValueError(f"payload too short for an SDU id: {len(payload)} bytes")
    return int(ID_HEADER.unpack_from(payload)[0])


class TrafficGenerator:
    """Emits whole SDUs at the profile's rate, 1 ms at a time.

    Credit is kept in integer millibits so that no rounding accumulates
    over a run: after *n* ms the bytes emitted are within one SDU of the
    integral of the rate.
    """

    def __init__(self, profile: RateProfile, sdu_size: int, rng: np.random.Generator):
        if sdu_size <= ID_HEADER.size:
            raise ValueError(f"sdu_size must exceed {ID_HEADER.size} bytes, got {sdu_size}")
        self.profile = profile
        self.sdu_size = sdu_size
        self.rng = rng
        self.next_id = 0
        self.bytes_emitted = 0
        self._credit_mbit = 0
        self._sdu_mbit = sdu_size * 8 * 1000

    def tick(self, t_ms: int) -> list[Sdu]:
        rate = self.profile.rate_at(t_ms / 1000.0)
        # rate_bps over 1 ms is rate_bps / 1000 bits, i.e. rate_bps millibits.
        self._credit_mbit += round(rate)
        count, self._credit_mbit = divmod(self._credit_mbit, self._sdu_mbit)
        return [self._make_sdu(t_ms) for _ in range(count)]

    def _make_sdu(self, t_ms: int) -> Sdu:
        filler = self.rng.bytes(self.sdu_size - ID_HEADER.size)
        sdu = Sdu(id=self.next_id, payload=ID_HEADER.pack(self.next_id) + filler, created_at=t_ms)
        self.next_id += 1
        self.bytes_emitted += self.sdu_size
        return sdu


def gen_traffic(generator: TrafficGenerator, t_ms: int) -> list[Sdu]:
    """SDUs emitted during millisecond *t_ms*."""
    return generator.tick(t_ms)
