"""Value types shared by the flow controller and the simulator."""

from __future__ import annotations

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    from enum import StrEnum
else:
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of ``enum.StrEnum`` for Python 3.10."""

        __str__ = str.__str__
        __format__ = str.__format__

FRAME_MS = 10
SUBFRAMES_PER_FRAME = 10


class Mode(StrEnum):
    """Transmission mode chosen by the load threshold."""

    SWITCH = "switch"
    LWA = "lwa"


class Link(StrEnum):
    """Radio path a PDCP PDU is handed to."""

    LTE = "lte"
    WIFI = "wifi"


@dataclass(frozen=True)
class BacklogDelta:
    """Queue-length change of each link over one sensing period.

    ``q_lte`` and ``q_wifi`` are the queue lengths at the sensing instant.
    """

    d_lte: int
    d_wifi: int
    q_lte: int = 0
    q_wifi: int = 0
