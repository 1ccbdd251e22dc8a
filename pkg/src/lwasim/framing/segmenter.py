"""Sender side: fill transport blocks from a queue of upper-layer units."""

from __future__ import annotations

from collections import deque
from collections.abc import Hashable, Iterator
from dataclasses import dataclass, field

from lwasim.framing.codec import (
    DESCRIPTOR_LEN,
    FIXED_HEADER_LEN,
    MAX_LI,
    MIN_TB_SIZE,
    SN_MODULUS,
    FrameHeader,
    FramedPdu,
)

DEFAULT_MAX_CONCAT = 16


class SduQueue:
    """FIFO of byte strings waiting for the LTE path.

    The head may be partially sent; ``head_offset`` marks how much of it
    already left in earlier transport blocks. Each item may carry a tag
    (the harness uses the SDU id) that is reported back once the item's
    last byte has been framed.

    The queue owns the :class:`Segmenter` that drains it, so the SN
    counter survives across :func:`build_pdus` calls.
    """

    def __init__(self, max_concat: int = DEFAULT_MAX_CONCAT, first_sn: int = 0) -> None:
        self._items: deque[tuple[bytes, Hashable]] = deque()
        self.head_offset = 0
        self.bytes_queued = 0
        self.segmenter = Segmenter(max_concat=max_concat, first_sn=first_sn)

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __iter__(self) -> Iterator[bytes]:
        return (data for data, _ in self._items)

    def push(self, data: bytes, tag: Hashable = None) -> None:
        if not data:
            raise ValueError("cannot queue an empty unit")
        self._items.append((data, tag))
        self.bytes_queued += len(data)

    def _take(self, count: int) -> tuple[bytes, bool, Hashable]:
        """Consume up to *count* bytes of the head; report whether it finished."""
        data, tag = self._items[0]
        chunk = data[self.head_offset:self.head_offset + count]
        self.head_offset += len(chunk)
        self.bytes_queued -= len(chunk)
        if self.head_offset == len(data):
            self._items.popleft()
            self.head_offset = 0
            return chunk, True, tag
        return chunk, False, tag


@dataclass
class BuildResult:
    """One framed PDU plus the tags of the units it completed."""

    pdu: FramedPdu
    completed: list[Hashable] = field(default_factory=list)


class Segmenter:
    """Owns the 7-bit SN counter and fills transport blocks greedily."""

    def __init__(self, max_concat: int = DEFAULT_MAX_CONCAT, first_sn: int = 0):
        if max_concat < 1:
            raise ValueError("max_concat must be >= 1")
        if not 0 <= first_sn < SN_MODULUS:
            raise ValueError(f"first_sn out of range: {first_sn}")
        self.max_concat = max_concat
        self.next_sn = first_sn

    def build(self, queue: SduQueue, tb_size: int) -> BuildResult:
        """Build one PDU of exactly *tb_size* encoded bytes from the queue head.

        A pending fragment is resumed first (start_frag), then whole units
        follow; the last unit is split when it does not fit (end_frag) and
        its remainder stays at the queue head.
        """
        if tb_size < MIN_TB_SIZE:
            raise ValueError(f"tb_size must be >= {MIN_TB_SIZE}, got {tb_size}")
        if not queue:
            raise ValueError("cannot build a PDU from an empty queue")

        start_frag = queue.head_offset > 0
        end_frag = False
        room = tb_size - FIXED_HEADER_LEN
        segments: list[bytes] = []
        completed: list[Hashable] = []

        while queue and len(segments) < self.max_concat:
            avail = min(room - DESCRIPTOR_LEN, MAX_LI)
            if avail < 1:
                break
            chunk, finished, tag = queue._take(avail)
            segments.append(chunk)
            room -= DESCRIPTOR_LEN + len(chunk)
            if finished:
                completed.append(tag)
            else:
                end_frag = True
                break

        header = FrameHeader(
            start_frag=start_frag,
            end_frag=end_frag,
            sn=self.next_sn,
            lis=[len(s) for s in segments],
        )
        self.next_sn = (self.next_sn + 1) % SN_MODULUS
        pdu = FramedPdu(header=header, payload=b"".join(segments), padding_len=room)
        return BuildResult(pdu=pdu, completed=completed)


def build_pdus(queue: SduQueue, tb_size: int) -> FramedPdu:
    """Build one transport block from *queue*, which is updated in place.

    SNs and the concatenation cap come from the queue's own segmenter.
    """
    return queue.segmenter.build(queue, tb_size).pdu
