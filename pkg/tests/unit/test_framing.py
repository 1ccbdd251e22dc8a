"""Tests for the segmentation/concatenation framing layer."""

import numpy as np
import pytest

from lwasim.framing.codec import (
    FrameHeader,
    FramedPdu,
    TruncatedError,
    ZeroLIError,
    decode,
    encode,
)
from lwasim.framing.reassembler import Reassembler, ReassemblyState, ReassemblyStats, reassemble
from lwasim.framing.segmenter import Segmenter, SduQueue, build_pdus


def _queue(*units: bytes, max_concat: int = 16, first_sn: int = 0) -> SduQueue:
    queue = SduQueue(max_concat=max_concat, first_sn=first_sn)
    for i, unit in enumerate(units):
        queue.push(unit, tag=i)
    return queue


# --- codec -------------------------------------------------------------------


def test_encode_single_segment():
    """Test the header bytes of a one-segment PDU."""
    payload = bytes(range(256)) * 3 + bytes(232)
    pdu = FramedPdu(FrameHeader(False, False, 5, [1000]), payload)

    data = encode(pdu)

    assert data[:4] == b"\x00\x05\x07\xd0"
    assert data[4:] == payload


def test_encode_tail_fragment_sets_low_fi_bit():
    """Test FI=01 for a PDU ending mid-unit."""
    pdu = FramedPdu(FrameHeader(False, True, 0, [1]), b"\xab")

    assert encode(pdu) == b"\x01\x00\x00\x02\xab"


def test_encode_descriptor_chain():
    """Test the E bit is set on every descriptor but the last."""
    pdu = FramedPdu(FrameHeader(False, False, 127, [3, 4]), b"abcdefg")

    data = encode(pdu)

    assert data[1] == 127
    assert data[2:4] == b"\x00\x07"
    assert data[4:6] == b"\x00\x08"
    assert data[6:] == b"abcdefg"


def test_encode_appends_zero_padding():
    """Test padding bytes are zero and counted in the size."""
    pdu = FramedPdu(FrameHeader(True, False, 9, [2]), b"hi", padding_len=6)

    data = encode(pdu)

    assert len(data) == pdu.size == 2 + 2 + 2 + 6
    assert data.endswith(bytes(6))


def test_decode_recovers_padding_length():
    """Test decode treats trailing bytes as padding."""
    pdu = FramedPdu(FrameHeader(True, True, 77, [10, 20, 5]), bytes(35), padding_len=13)

    decoded = decode(encode(pdu))

    assert decoded.header == pdu.header
    assert decoded.payload == pdu.payload
    assert decoded.padding_len == 13


def test_decode_ignores_reserved_bits():
    """Test reserved bits in byte 0 and the SN high bit are ignored."""
    decoded = decode(b"\xfd\x85\x00\x04xy")

    assert decoded.header.start_frag is False
    assert decoded.header.end_frag is True
    assert decoded.header.sn == 5
    assert decoded.payload == b"xy"


def test_decode_truncated_payload():
    """Test a descriptor promising more data than the buffer holds."""
    with pytest.raises(TruncatedError) as exc_info:
        decode(b"\x00\x05\x07\xd1" + b"\xaa" * 1000)

    assert exc_info.value.offset >= 4


def test_decode_truncated_descriptor_chain():
    """Test E=1 on the last bytes of the buffer."""
    with pytest.raises(TruncatedError) as exc_info:
        decode(b"\x00\x00\x00\x03")

    assert exc_info.value.offset == 4


def test_decode_zero_li():
    """Test LI 0 is rejected with its offset."""
    with pytest.raises(ZeroLIError) as exc_info:
        decode(b"\x00\x00\x00\x01")

    assert exc_info.value.offset == 2


def test_decode_short_buffer():
    """Test buffers shorter than a minimal header."""
    with pytest.raises(TruncatedError):
        decode(b"\x00\x00\x00")


def test_header_validation():
    """Test invalid headers are rejected at construction."""
    with pytest.raises(ValueError):
        FrameHeader(False, False, 128, [1])
    with pytest.raises(ValueError):
        FrameHeader(False, False, 0, [])
    with pytest.raises(ValueError):
        FrameHeader(False, False, 0, [0])
    with pytest.raises(ValueError):
        FrameHeader(False, False, 0, [32768])
    with pytest.raises(ValueError):
        FramedPdu(FrameHeader(False, False, 0, [3]), b"ab")


def test_codec_round_trip_random_headers():
    """Test decode(encode(p)) == p over randomized headers."""
    rng = np.random.default_rng(11)
    for _ in range(500):
        lis = [int(x) for x in rng.integers(1, 300, size=int(rng.integers(1, 6)))]
        header = FrameHeader(
            start_frag=bool(rng.integers(2)),
            end_frag=bool(rng.integers(2)),
            sn=int(rng.integers(128)),
            lis=lis,
        )
        pdu = FramedPdu(header, rng.bytes(sum(lis)), padding_len=int(rng.integers(0, 50)))

        decoded = decode(encode(pdu))

        assert decoded == pdu


# --- segmenter ---------------------------------------------------------------


def test_build_splits_long_unit():
    """Test a 250-byte unit over 100-byte payload room."""
    queue = _queue(bytes(250))

    pdus = [build_pdus(queue, 104) for _ in range(3)]

    assert not queue
    assert [(p.header.start_frag, p.header.end_frag) for p in pdus] == [
        (False, True),
        (True, True),
        (True, False),
    ]
    assert [p.header.lis for p in pdus] == [[100], [100], [50]]
    assert pdus[2].padding_len == 50
    assert all(p.size == 104 for p in pdus)
    assert [p.header.sn for p in pdus] == [0, 1, 2]


def test_build_pdus_counter_survives_calls():
    """Test successive build_pdus calls number PDUs and reassemble cleanly."""
    unit = bytes(range(250))
    queue = _queue(unit)
    reassembler = Reassembler()

    pdus = [build_pdus(queue, 104) for _ in range(3)]
    out = [u for p in pdus for u in reassembler.push(decode(encode(p)))]

    assert [p.header.sn for p in pdus] == [0, 1, 2]
    assert out == [unit]
    assert reassembler.stats == ReassemblyStats(delivered=1)


def test_build_pdus_sn_wraps():
    """Test build_pdus wraps the queue's SN counter from 127 to 0."""
    queue = _queue(bytes(40), first_sn=127)

    assert build_pdus(queue, 24).header.sn == 127
    assert build_pdus(queue, 24).header.sn == 0


def test_build_exact_fit():
    """Test a unit filling the room exactly."""
    queue = _queue(bytes(100))

    pdu = build_pdus(queue, 104)

    assert pdu.header.fi == 0
    assert pdu.header.lis == [100]
    assert pdu.padding_len == 0
    assert encode(pdu)[2:4] == b"\x00\xc8"


def test_build_concatenates_whole_units():
    """Test several small units share one PDU."""
    queue = _queue(b"a" * 10, b"b" * 20, b"c" * 30)

    result = Segmenter().build(queue, 200)

    assert result.pdu.header.lis == [10, 20, 30]
    assert result.pdu.header.fi == 0
    assert result.completed == [0, 1, 2]
    assert result.pdu.size == 200


def test_build_respects_max_concat():
    """Test the segment cap leaves remaining units queued."""
    queue = _queue(*(bytes([i]) * 5 for i in range(10)), max_concat=4)

    pdu = build_pdus(queue, 500)

    assert len(pdu.header.lis) == 4
    assert len(queue) == 6


def test_build_head_and_tail_fragments():
    """Test a PDU may carry a tail fragment then a head fragment."""
    queue = _queue(bytes(30), bytes(30))
    segmenter = Segmenter()
    segmenter.build(queue, 24)

    pdu = segmenter.build(queue, 24).pdu

    assert pdu.header.start_frag is True
    assert pdu.header.end_frag is True
    assert pdu.header.lis == [10, 8]


def test_sn_wraps_at_128():
    """Test the SN counter wraps from 127 to 0."""
    queue = _queue(bytes(40))
    segmenter = Segmenter(first_sn=127)

    first = segmenter.build(queue, 24).pdu
    second = segmenter.build(queue, 24).pdu

    assert first.header.sn == 127
    assert second.header.sn == 0


def test_build_preconditions():
    """Test tb_size and empty-queue preconditions."""
    with pytest.raises(ValueError):
        build_pdus(_queue(b"x"), 4)
    with pytest.raises(ValueError):
        build_pdus(SduQueue(), 100)
    with pytest.raises(ValueError):
        SduQueue().push(b"")


def test_li_cap_ends_pdu():
    """Test a unit longer than the LI limit is cut at 32767 bytes."""
    queue = _queue(bytes(40000), b"next")

    pdu = build_pdus(queue, 50000)

    assert pdu.header.lis == [32767]
    assert pdu.header.end_frag is True
    assert pdu.size == 50000
    assert queue.head_offset == 32767


def test_queue_length_counts_partial_head():
    """Test len() includes a partially sent head."""
    queue = _queue(bytes(300), bytes(10))
    build_pdus(queue, 104)

    assert len(queue) == 2
    assert queue.head_offset == 100
    assert queue.bytes_queued == 210


# --- reassembly --------------------------------------------------------------


def test_reassemble_split_unit():
    """Test the 250-byte unit is emitted on the third PDU."""
    unit = bytes(range(250))
    queue = _queue(unit)
    segmenter = Segmenter()
    reassembler = Reassembler()

    outputs = [reassembler.push(decode(encode(segmenter.build(queue, 104).pdu))) for _ in range(3)]

    assert outputs == [[], [], [unit]]


def test_reassemble_concatenated_units():
    """Test a FI=00 PDU with two LIs emits both units."""
    pdu = FramedPdu(FrameHeader(False, False, 0, [10, 20]), b"a" * 10 + b"b" * 20)

    assert reassemble(ReassemblyState(), pdu) == [b"a" * 10, b"b" * 20]


def test_reassemble_discards_on_gap():
    """Test a unit spanning a lost PDU is never emitted."""
    state = ReassemblyState()
    stats = ReassemblyStats()
    pdu3 = FramedPdu(FrameHeader(False, False, 3, [5]), b"whole")
    pdu4 = FramedPdu(FrameHeader(False, True, 4, [5]), b"part1")
    pdu6 = FramedPdu(FrameHeader(True, False, 6, [5, 4]), b"part3next")

    assert reassemble(state, pdu3, stats) == [b"whole"]
    assert reassemble(state, pdu4, stats) == []
    assert reassemble(state, pdu6, stats) == [b"next"]

    assert stats.sn_gaps == 1
    assert stats.discarded_partials == 1
    assert stats.discarded_fragments == 1
    assert state.expected_sn == 7
    assert not state.partial_open
    assert state.partial == bytearray()


def test_reassemble_first_pdu_continuation_dropped():
    """Test a stream that starts mid-unit drops the orphan fragment."""
    state = ReassemblyState()
    pdu = FramedPdu(FrameHeader(True, False, 10, [3, 2]), b"endok")

    assert reassemble(state, pdu) == [b"ok"]


@pytest.mark.slow
def test_reassembly_conservation_random_streams():
    """Test build -> encode -> decode -> reassemble reproduces 100k streams."""
    rng = np.random.default_rng(2024)
    for _ in range(100_000):
        units = [rng.bytes(int(n)) for n in rng.integers(1, 200, size=int(rng.integers(1, 8)))]
        tb_size = int(rng.integers(5, 400))
        max_concat = int(rng.integers(1, 20))
        queue = _queue(*units, max_concat=max_concat, first_sn=int(rng.integers(128)))
        reassembler = Reassembler()
        out: list[bytes] = []

        while queue:
            pdu = build_pdus(queue, tb_size)
            data = encode(pdu)
            assert len(data) == tb_size
            out.extend(reassembler.push(decode(data)))

        assert out == units
        assert reassembler.stats.sn_gaps == 0


def test_single_loss_only_affects_overlapping_units():
    """Test dropping one PDU loses exactly the units it carries bytes of."""
    rng = np.random.default_rng(7)
    for _ in range(300):
        units = [rng.bytes(int(n)) for n in rng.integers(1, 120, size=int(rng.integers(2, 12)))]
        queue = _queue(*units)
        segmenter = Segmenter()
        pdus: list[FramedPdu] = []
        touched: list[set[int]] = []
        done = 0
        while queue:
            result = segmenter.build(queue, int(rng.integers(5, 150)) if not pdus else 60)
            pdus.append(result.pdu)
            touched.append(set(range(done, done + len(result.pdu.header.lis))))
            done += len(result.completed)

        drop = int(rng.integers(len(pdus)))
        reassembler = Reassembler()
        out: list[bytes] = []
        for i, pdu in enumerate(pdus):
            if i != drop:
                out.extend(reassembler.push(pdu))

        expected = [u for i, u in enumerate(units) if i not in touched[drop]]
        assert out == expected
