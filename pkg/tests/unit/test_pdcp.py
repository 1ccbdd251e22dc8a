"""Tests for PDCP numbering and header parsing."""

from dataclasses import dataclass

import pytest

from lwasim.pdcp.entity import (
    SN_MODULUS,
    PdcpPdu,
    PdcpTruncatedError,
    PdcpTxState,
    pdcp_rx,
    pdcp_tx,
)


@dataclass
class FakeSdu:
    payload: bytes
    created_at: float = 0.0


def test_first_pdu_has_zero_header():
    """Test SN 0 serializes to two zero bytes."""
    state = PdcpTxState()

    pdu = pdcp_tx(state, FakeSdu(bytes(100)))

    assert pdu.sn == 0
    assert pdu.to_bytes()[:2] == b"\x00\x00"
    assert len(pdu) == 102
    assert state.next_sn == 1


def test_counter_wraps_after_4095():
    """Test SN 4095 is followed by 0."""
    state = PdcpTxState(next_sn=4095)

    pdu = pdcp_tx(state, FakeSdu(b"x"))

    assert pdu.sn == 4095
    assert pdu.to_bytes()[:2] == b"\x0f\xff"
    assert state.next_sn == 0


def test_sequential_sns_follow_arrival_order():
    """Test 1000 SDUs get SNs 0..999."""
    state = PdcpTxState()

    sns = [pdcp_tx(state, FakeSdu(b"x", created_at=i)).sn for i in range(1000)]

    assert sns == list(range(1000))


def test_enqueue_time_copied_from_sdu():
    """Test the PDU keeps the SDU creation time."""
    pdu = pdcp_tx(PdcpTxState(), FakeSdu(b"abc", created_at=42.0))

    assert pdu.enqueue_time == 42.0


def test_rx_hand_decoded():
    """Test parsing a hand-built PDU."""
    pdu = pdcp_rx(b"\x0f\xff\x01", now=3.5)

    assert pdu.sn == 4095
    assert pdu.payload == b"\x01"
    assert pdu.enqueue_time == 3.5


def test_rx_ignores_reserved_bits():
    """Test the four high header bits are not an error."""
    assert pdcp_rx(b"\xf0\x07zz").sn == 7


def test_rx_truncated():
    """Test inputs shorter than three bytes."""
    with pytest.raises(PdcpTruncatedError):
        pdcp_rx(b"\x00\x01")
    with pytest.raises(PdcpTruncatedError):
        pdcp_rx(b"")


def test_round_trip_every_sn():
    """Test serialization round-trips for all 4096 SNs."""
    for sn in range(SN_MODULUS):
        pdu = PdcpPdu(sn=sn, payload=sn.to_bytes(2, "big") + b"p")

        parsed = pdcp_rx(pdu.to_bytes())

        assert parsed.sn == sn
        assert parsed.payload == pdu.payload


def test_invalid_values_rejected():
    """Test PDU and state invariants."""
    with pytest.raises(ValueError):
        PdcpPdu(sn=4096, payload=b"x")
    with pytest.raises(ValueError):
        PdcpPdu(sn=0, payload=b"")
    with pytest.raises(ValueError):
        PdcpTxState(next_sn=-1)
