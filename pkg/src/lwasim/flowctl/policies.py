"""Split-ratio update policies.

A policy maps (current WiFi share, backlog delta, tuning) to the new WiFi
share. Only one side may be saturated for the share to move: when both
queues grow, or neither does, the share is left alone.

The growth-only policies leave a standing backlog in place once its queue
stops growing; ``drain`` also treats a queue above ``standing_pkts`` as
saturated, so the share keeps moving until that backlog has cleared.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

from lwasim.flowctl.types import BacklogDelta


@dataclass(frozen=True)
class RatioTuning:
    """Knobs shared by every policy."""

    base_b: float = 1000.0
    max_step: float = 0.25
    deadband_pkts: int = 0
    standing_pkts: int = 4


RatioPolicy = Callable[[float, BacklogDelta, RatioTuning], float]


def _clamp(value: float, low: float = 0.0, high: float = 1.0) -> float:
    return max(low, min(high, value))


def step_size(backlog: int, tuning: RatioTuning) -> float:
    """Adjustment magnitude: backlog growth over the base, clamped."""
    return _clamp(backlog / tuning.base_b, 0.0, tuning.max_step)


def _saturated_side(delta: BacklogDelta, deadband: int) -> str | None:
    lte_grows = delta.d_lte > deadband
    wifi_grows = delta.d_wifi > deadband
    if lte_grows and not wifi_grows:
        return "lte"
    if wifi_grows and not lte_grows:
        return "wifi"
    return None


def additive_update(share: float, delta: BacklogDelta, tuning: RatioTuning) -> float:
    """Shift the share by the step toward the unsaturated link."""
    side = _saturated_side(delta, tuning.deadband_pkts)
    if side == "lte":
        return min(1.0, share + step_size(delta.d_lte, tuning))
    if side == "wifi":
        return max(0.0, share - step_size(delta.d_wifi, tuning))
    return share


def multiplicative_update(share: float, delta: BacklogDelta, tuning: RatioTuning) -> float:
    """Scale the saturated link's weight down by (1 - step)."""
    side = _saturated_side(delta, tuning.deadband_pkts)
    if side == "lte":
        lte_share = (1.0 - share) * (1.0 - step_size(delta.d_lte, tuning))
        return _clamp(1.0 - lte_share)
    if side == "wifi":
        return _clamp(share * (1.0 - step_size(delta.d_wifi, tuning)))
    return share


def static_update(share: float, delta: BacklogDelta, tuning: RatioTuning) -> float:
    """Fixed ratio: backlog is observed but never acted on."""
    return share


def drain_update(share: float, delta: BacklogDelta, tuning: RatioTuning) -> float:
    """Multiplicative update driven by growth or by backlog above the standing level."""
    pressure = BacklogDelta(
        d_lte=max(delta.d_lte, delta.q_lte - tuning.standing_pkts),
        d_wifi=max(delta.d_wifi, delta.q_wifi - tuning.standing_pkts),
        q_lte=delta.q_lte,
        q_wifi=delta.q_wifi,
    )
    return multiplicative_update(share, pressure, tuning)


RATIO_POLICIES: dict[str, RatioPolicy] = {
    "additive": additive_update,
    "multiplicative": multiplicative_update,
    "static": static_update,
    "drain": drain_update,
}


def get_policy(name: str) -> RatioPolicy:
    try:
        return RATIO_POLICIES[name]
    except KeyError:
        raise ValueError(
            f"Unknown ratio policy: {name}. Choose from {', '.join(RATIO_POLICIES)}"
        ) from None
